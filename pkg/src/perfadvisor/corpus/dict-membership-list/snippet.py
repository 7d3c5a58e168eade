# Membership tests against a list instead of a hashed container.
allowed = [i * 7 for i in range(1500)]
hits = 0
for i in range(15000):
    if i in allowed:
        hits += 1
print(hits)
