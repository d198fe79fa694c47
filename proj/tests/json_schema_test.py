import json
import subprocess
import sys
from pathlib import Path

import jsonschema

dimpc, root = sys.argv[1], Path(sys.argv[2])
schema = json.loads((root / "schema" / "diagnostics.schema.json").read_text())
validator = jsonschema.Draft202012Validator(schema)

inputs = sorted((root / "corpus" / "rules").rglob("*.dimp")) + sorted((root / "corpus" / "djs").glob("*.djs"))
inputs += sorted((root / "corpus" / "desugar").glob("*.djs"))
failures = 0
for path in inputs:
    args = [dimpc, "--json", "--emit-obligations", str(path)]
    text = path.read_text()
    if "feature: exists-loc" in text:
        args += ["--feature", "exists-loc"]
    first = subprocess.run(args, capture_output=True, text=True)
    second = subprocess.run(args, capture_output=True, text=True)
    report = json.loads(first.stdout)
    errors = list(validator.iter_errors(report))
    if errors:
        failures += 1
        print(f"{path}: {errors[0].message}")
    if report["exit_code"] != first.returncode:
        failures += 1
        print(f"{path}: exit_code {report['exit_code']} but process returned {first.returncode}")
    if first.stdout != second.stdout:
        failures += 1
        print(f"{path}: output differs between runs")

missing = subprocess.run([dimpc, "--json", str(root / "corpus" / "no_such_file.dimp")], capture_output=True, text=True)
report = json.loads(missing.stdout)
if list(validator.iter_errors(report)) or report["error"]["kind"] != "io":
    failures += 1
    print("missing file report is invalid")

print(f"{len(inputs) + 1} reports checked, {failures} failures")
sys.exit(1 if failures else 0)
