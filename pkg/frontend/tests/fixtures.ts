// Service responses recorded from a live `perfadvisor serve` session
// backed by the bundled stub model server (see tests/README note in the
// repo root). Regenerate by re-running the recording drive; do not edit
// by hand.

import type {
  EndpointInfo,
  OptimizeFrame,
  ProfileDoc,
  Region,
  ValidationResult,
} from "../src/api";

export const profileFixture: ProfileDoc = {
  "format_version": 1,
  "program": "python3 demo.py",
  "elapsed_s": 8.0,
  "max_footprint_mb": 96.0,
  "producer": "recorded",
  "files": {
    "demo.py": {
      "source_digest": "6bf1b3f8bdaf98e841642b1dbe6d2d196bc3e3427c75b5c3b68d1f136d3a7db0",
      "line_count": 15,
      "functions": [
        {
          "name": "build",
          "start_line": 1,
          "end_line": 5
        },
        {
          "name": "total",
          "start_line": 7,
          "end_line": 12
        }
      ],
      "lines": [
        {
          "line_no": 4,
          "cpu_python_pct": 30.0,
          "cpu_native_pct": 12.5,
          "cpu_system_pct": 5.0,
          "mem_avg_mb": 40.0,
          "mem_peak_mb": 64.0,
          "copy_mb_per_s": 0.0,
          "gpu_pct": 0.0
        },
        {
          "line_no": 11,
          "cpu_python_pct": 22.0,
          "cpu_native_pct": 0.0,
          "cpu_system_pct": 0.0,
          "mem_avg_mb": 0.0,
          "mem_peak_mb": 0.0,
          "copy_mb_per_s": 150.0,
          "gpu_pct": 0.0
        },
        {
          "line_no": 14,
          "cpu_python_pct": 2.0,
          "cpu_native_pct": 0.0,
          "cpu_system_pct": 0.0,
          "mem_avg_mb": 0.0,
          "mem_peak_mb": 0.0,
          "copy_mb_per_s": 0.0,
          "gpu_pct": 0.0
        }
      ]
    }
  }
};

export const hotspotsFixture: Region[] = [
  {
    "path": "demo.py",
    "start_line": 4,
    "end_line": 4,
    "reason": "cpu",
    "score": 9.5,
    "context_start": 1,
    "context_end": 5
  },
  {
    "path": "demo.py",
    "start_line": 11,
    "end_line": 11,
    "reason": "cpu",
    "score": 4.4,
    "context_start": 7,
    "context_end": 12
  }
];

export const sourceFixture: { path: string; digest: string; text: string } = {
  "path": "demo.py",
  "digest": "6bf1b3f8bdaf98e841642b1dbe6d2d196bc3e3427c75b5c3b68d1f136d3a7db0",
  "text": "def build(n):\n    rows = []\n    for i in range(n):\n        rows.append([j * i for j in range(n)])\n    return rows\n\ndef total(rows):\n    acc = 0\n    for row in rows:\n        for v in row:\n            acc += v\n    return acc\n\ndata = build(250)\nprint(total(data))\n"
};

export const modelsFixture: EndpointInfo[] = [
  {
    "name": "local-llama",
    "model": "llama3.2",
    "protocol": "ollama-chat",
    "reachable": true,
    "model_present": true
  }
];

export const optimizeFramesFixture: OptimizeFrame[] = [
  {
    "type": "chunk",
    "text": "Avoid rebuilding the row list;\n"
  },
  {
    "type": "chunk",
    "text": "use a comprehension:\n"
  },
  {
    "type": "chunk",
    "text": "```python\ndef build(n):\n    return [[j * i for j in range(n)] for i in range(n)]\n```\n"
  },
  {
    "type": "done",
    "suggestion": {
      "id": "30f8c8a93b401f791eb46fcd436d5e50e76d937cf2ba8c138b9e0db355e6adc8",
      "region": {
        "path": "demo.py",
        "start_line": 4,
        "end_line": 4,
        "reason": "cpu",
        "score": 9.5,
        "context_start": 1,
        "context_end": 5
      },
      "model": "llama3.2",
      "raw_text": "Avoid rebuilding the row list;\nuse a comprehension:\n```python\ndef build(n):\n    return [[j * i for j in range(n)] for i in range(n)]\n```\n",
      "rationale": "Avoid rebuilding the row list;\nuse a comprehension:",
      "candidates": [
        {
          "original_text": "def build(n):\n    rows = []\n    for i in range(n):\n        rows.append([j * i for j in range(n)])\n    return rows",
          "replacement_text": "def build(n):\n    return [[j * i for j in range(n)] for i in range(n)]\n",
          "unified_diff": "--- original\n+++ candidate\n@@ -1,5 +1,2 @@\n def build(n):\n-    rows = []\n-    for i in range(n):\n-        rows.append([j * i for j in range(n)])\n-    return rows\n\\ No newline at end of file\n+    return [[j * i for j in range(n)] for i in range(n)]\n"
        }
      ]
    }
  }
];

export const validationFixture: ValidationResult = {
  "syntax_ok": true,
  "correct": true,
  "t_original_s": 0.04072663099941565,
  "t_candidate_s": 0.03844275200026459,
  "spread_original": 0.0022108339999249438,
  "spread_candidate": 0.009931272998073837,
  "speedup": 1.059409872610976,
  "failure": null,
  "skipped": false
};
