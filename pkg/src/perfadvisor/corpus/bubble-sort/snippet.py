# Bubble sort on a deterministic pseudo-random list.
xs = [(i * 1103515245 + 12345) % 1000 for i in range(700)]
n = len(xs)
for i in range(n):
    for j in range(n - i - 1):
        if xs[j] > xs[j + 1]:
            xs[j], xs[j + 1] = xs[j + 1], xs[j]
print(xs[0], xs[350], xs[-1], sum(xs))
