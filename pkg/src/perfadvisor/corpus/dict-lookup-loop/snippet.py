# Repeated dictionary lookups on a hot path.
table = {f"key{i}": i * 3 for i in range(2000)}
total = 0
for _ in range(300):
    for i in range(2000):
        k = "key" + str(i)
        if k in table:
            total += table[k]
print(total)
