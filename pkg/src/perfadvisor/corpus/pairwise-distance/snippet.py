# All-pairs squared distances in 2D.
pts = [((i * 31 % 200) / 10.0, (i * 57 % 200) / 10.0) for i in range(450)]
total = 0.0
for i in range(len(pts)):
    xi, yi = pts[i]
    for j in range(i + 1, len(pts)):
        xj, yj = pts[j]
        dx = xi - xj
        dy = yi - yj
        total += dx * dx + dy * dy
print(round(total, 4))
