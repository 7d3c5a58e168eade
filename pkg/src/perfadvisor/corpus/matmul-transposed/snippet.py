# A @ B.T with explicit loops and no blocking.
n = 55
a = [[(i * 3 + j) % 9 for j in range(n)] for i in range(n)]
b = [[(i + j * 5) % 8 for j in range(n)] for i in range(n)]
acc = 0
for i in range(n):
    for j in range(n):
        s = 0
        for k in range(n):
            s += a[i][k] * b[j][k]
        acc += s
print(acc)
