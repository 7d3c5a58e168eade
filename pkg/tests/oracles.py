"""Independent brute-force reference implementations.

These deliberately do NOT share algorithms with the library: hotspot
merging here is transitive closure over all flagged pairs (union-find)
rather than a linear scan, so agreement between the two is meaningful.
"""

from __future__ import annotations

from perfadvisor.hotspots import HotspotRegion, Thresholds, score_line
from perfadvisor.profile import ProfileDocument


def oracle_detect_hotspots(doc: ProfileDocument, t: Thresholds) -> list[HotspotRegion]:
    regions: list[HotspotRegion] = []
    for path, fp in doc.files.items():
        flagged = []
        for m in fp.lines:
            score, reason = score_line(m, t)
            if reason is not None:
                flagged.append((m.line_no, score, reason))

        parent = list(range(len(flagged)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        def union(i: int, j: int) -> None:
            parent[find(i)] = find(j)

        for i in range(len(flagged)):
            for j in range(i + 1, len(flagged)):
                if abs(flagged[j][0] - flagged[i][0]) - 1 <= t.merge_gap_lines:
                    union(i, j)

        groups: dict[int, list] = {}
        for i in range(len(flagged)):
            groups.setdefault(find(i), []).append(flagged[i])
        for group in groups.values():
            group.sort(key=lambda f: f[0])
            best_score = max(f[1] for f in group)
            best = next(f for f in group if f[1] == best_score)
            regions.append(
                HotspotRegion(
                    path=path,
                    start_line=group[0][0],
                    end_line=group[-1][0],
                    reason=best[2],
                    score=best_score,
                    context_start=group[0][0],
                    context_end=group[-1][0],
                )
            )
    regions.sort(key=lambda r: (-r.score, r.path, r.start_line))
    return regions
