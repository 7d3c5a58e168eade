# Windowed mean recomputing each window sum from scratch.
xs = [(i * 37 % 101) / 7.0 for i in range(6000)]
w = 50
out = []
for i in range(len(xs) - w):
    s = 0.0
    for j in range(i, i + w):
        s += xs[j]
    out.append(s / w)
print(len(out), round(sum(out), 3), round(out[123], 6))
