# Inverting a mapping by scanning all items per query.
table = {i: str(i * 13 % 5000) for i in range(3000)}
found = 0
for q in range(0, 5000, 7):
    target = str(q)
    for k, v in table.items():
        if v == target:
            found += k
            break
print(found)
