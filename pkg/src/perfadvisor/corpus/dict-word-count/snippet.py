# Word-frequency counting with per-key checks.
words = []
for i in range(8000):
    words.append("w" + str(i % 97))
counts = {}
for w in words:
    if w in counts:
        counts[w] = counts[w] + 1
    else:
        counts[w] = 1
print(sum(counts.values()), len(counts), counts["w7"])
