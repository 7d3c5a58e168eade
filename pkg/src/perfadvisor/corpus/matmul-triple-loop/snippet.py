# Dense matrix product with index arithmetic in pure loops.
n = 60
a = [[(i * j + 1) % 10 for j in range(n)] for i in range(n)]
b = [[(i + 2 * j) % 7 for j in range(n)] for i in range(n)]
c = [[0] * n for _ in range(n)]
for i in range(n):
    for j in range(n):
        s = 0
        for k in range(n):
            s += a[i][k] * b[k][j]
        c[i][j] = s
print(sum(sum(row) for row in c), c[5][7], c[59][59])
