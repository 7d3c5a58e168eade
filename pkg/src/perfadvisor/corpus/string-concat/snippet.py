# Quadratic string building.
s = ""
for i in range(4000):
    s = s + str(i % 10)
print(len(s), s[:20])
