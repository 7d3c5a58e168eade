"""Walkthrough: build a profile document and find its hotspots.

Everything here is in-memory; with a real profile you would call
`parse_profile(path.read_bytes())` or `ingest_external(..., "scalene-json")`
instead of constructing the document by hand.
"""

from perfadvisor import (
    FileProfile,
    FunctionSpan,
    LineMetrics,
    ProfileDocument,
    Thresholds,
    detect_hotspots,
    expand_region,
    parse_profile,
    serialize_profile,
)

# A 30-line file where three lines dominate the run: a CPU-bound loop on
# lines 12-13 and a copy-heavy line 24.
fp = FileProfile(
    path="pipeline.py",
    line_count=30,
    lines=(
        LineMetrics(line_no=12, cpu_python_pct=41.0),
        LineMetrics(line_no=13, cpu_python_pct=22.0, cpu_native_pct=3.0),
        LineMetrics(line_no=24, copy_mb_per_s=450.0, mem_peak_mb=80.0),
    ),
    functions=(FunctionSpan("transform", 10, 18), FunctionSpan("export", 22, 28)),
)
doc = ProfileDocument(
    program="python3 pipeline.py",
    elapsed_s=42.0,
    max_footprint_mb=900.0,
    files={"pipeline.py": fp},
    producer="demo",
)

# The document round-trips through its canonical JSON form.
assert parse_profile(serialize_profile(doc)) == doc

thresholds = Thresholds()  # cpu 5%, mem 100 MB, copy 100 MB/s
print(f"{'lines':<10} {'reason':<8} {'score':<7} context")
for region in detect_hotspots(doc, thresholds):
    expanded = expand_region(region, fp, thresholds)
    span = f"{region.start_line}-{region.end_line}"
    ctx = f"[{expanded.context_start}, {expanded.context_end}] (enclosing function)"
    print(f"{span:<10} {region.reason:<8} {region.score:<7.2f} {ctx}")

# Lines 12 and 13 merge into one region (gap <= merge_gap_lines); the
# copy-heavy line stands alone. Context expands to the enclosing function.
