"""Put python/ (hypercolour and hypercolour_cli) and benchmarks/ (run_benchmark) on the import path."""
import os
import sys

_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

for _sub in ("python", "benchmarks"):
    _path = os.path.join(_ROOT, _sub)
    if _path not in sys.path:
        sys.path.insert(0, _path)
