"""CSV and JSON emitters for sweep and report artifacts.

Floating-point values are rendered with 17 significant digits so that
parsing an emitted file reproduces the original doubles bit for bit,
independent of locale.
"""

import csv
import dataclasses
import json

import numpy as np

from .qops import ConfigError

#: bumped whenever an emitted column layout or JSON field changes
SCHEMA_VERSION = "1.0"


def format_value(x):
    """Render a cell: floats with 17 significant digits, the rest as str."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (complex, np.complexfloating)):
        z = complex(x)
        return f"{format(z.real, '.17g')}{'+' if z.imag >= 0 else '-'}{format(abs(z.imag), '.17g')}j"
    return str(x)


def write_csv(path, header, rows):
    """Write rows (sequences or dicts keyed by the header) to a CSV file."""
    header = list(header)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            if isinstance(row, dict):
                missing = [k for k in header if k not in row]
                if missing:
                    raise ConfigError(f"row is missing columns {missing}")
                row = [row[k] for k in header]
            writer.writerow([format_value(x) for x in row])
    return path


def read_csv(path):
    """Parse a CSV written by write_csv back to (header, float-where-possible rows)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for raw in reader:
            row = []
            for cell in raw:
                if cell == "true":
                    row.append(True)
                elif cell == "false":
                    row.append(False)
                else:
                    try:
                        row.append(float(cell))
                    except ValueError:
                        row.append(cell)
            rows.append(row)
    return header, rows


def sanitize(obj):
    """Recursively convert numpy containers and dataclasses to JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: sanitize(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": sanitize(obj.real), "im": sanitize(obj.imag)}
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        # route through the 17-digit form so file text and value agree
        return float(format(float(obj), ".17g"))
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def write_json(path, payload):
    """Write a schema-versioned JSON document."""
    doc = {"schema_version": SCHEMA_VERSION}
    doc.update(sanitize(payload))
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, allow_nan=True)
        fh.write("\n")
    return path
