# Matrix-vector product, repeated.
n = 150
m = [[(i + j) % 11 for j in range(n)] for i in range(n)]
v = [(3 * j + 1) % 13 for j in range(n)]
out = [0] * n
for _ in range(60):
    for i in range(n):
        s = 0
        row = m[i]
        for j in range(n):
            s += row[j] * v[j]
        out[i] = s
print(sum(out), out[0], out[149])
