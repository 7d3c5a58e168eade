# Accumulate squares one element at a time.
total = 0
for i in range(400000):
    total += i * i
print(total)
