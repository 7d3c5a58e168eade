# Flattening plus membership dedup with a list accumulator.
nested = [[(i * j) % 50 for j in range(40)] for i in range(120)]
flat = []
for row in nested:
    for x in row:
        if x not in flat:
            flat.append(x)
print(len(flat), sum(flat))
