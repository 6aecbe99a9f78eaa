"""Figure rendering and plot-script generation for result CSVs.

Every scenario run renders its figures straight to files next to the CSVs
(the Agg backend keeps this headless); ``plot_script_text`` additionally
emits a standalone matplotlib script for a set of result files, detected by
their column schema, so figures can be regenerated or restyled without this
package.
"""

import csv
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .errors import SchemaError

# column schemas of the CSV files the CLI writes
_SCHEMAS = {
    "backflow": ["t_prime", "current", "normalized_density"],
    "superposition": ["t", "current", "normalized_density"],
    "density": ["t", "density", "normalized_density"],
    "table": ["target_P", "epsilon_s", "delta_t_s"],
    "sample": ["t", "density", "normalized_density", "std_error"],
}


def read_csv_columns(path):
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) if v != "" else np.nan for v in row]
                for row in reader]
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    return header, {name: data[:, i] for i, name in enumerate(header)}


def detect_schema(header):
    for name, columns in _SCHEMAS.items():
        if header[:len(columns)] == columns:
            return name
    raise SchemaError(f"unrecognized column layout {header}; expected one of "
                      f"{sorted(v[0] for v in _SCHEMAS.values())}-style files")


def require_columns(header, columns, path):
    for col in columns:
        if col not in header:
            raise SchemaError(f"{path}: missing required column {col!r}")


def render_backflow(csv_path, png_path):
    """Log-time plot: dash-dotted current and solid normalized density."""
    header, cols = read_csv_columns(csv_path)
    require_columns(header, _SCHEMAS["backflow"], csv_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(cols["t_prime"], cols["normalized_density"], "-", color="tab:blue",
            label="normalized arrival density")
    ax.plot(cols["t_prime"], cols["current"], "-.", color="tab:orange",
            label="current at x = 0")
    ax.set_xscale("log")
    ax.axhline(0.0, color="gray", lw=0.6)
    ax.set_xlabel("dimensionless time t'")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def render_superposition(csv_path, png_path):
    """Linear-time plot: solid normalized density, dashed current."""
    header, cols = read_csv_columns(csv_path)
    require_columns(header, _SCHEMAS["superposition"], csv_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(cols["t"], cols["normalized_density"], "-", color="tab:blue",
            label="normalized arrival density")
    ax.plot(cols["t"], cols["current"], "--", color="tab:orange",
            label="current at detector")
    ax.axhline(0.0, color="gray", lw=0.6)
    ax.set_xlabel("t")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def render_density(csv_path, png_path, analytic_csv=None):
    header, cols = read_csv_columns(csv_path)
    require_columns(header, ["t", "density"], csv_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if "std_error" in header:
        ax.errorbar(cols["t"], cols["density"], yerr=cols["std_error"],
                    fmt="o", ms=3, capsize=2, color="tab:blue",
                    label="sampled arrival density")
    else:
        ax.plot(cols["t"], cols["density"], "-", color="tab:blue",
                label="arrival density")
    if analytic_csv is not None:
        h2, c2 = read_csv_columns(analytic_csv)
        require_columns(h2, ["t", "density"], analytic_csv)
        ax.plot(c2["t"], c2["density"], "-", color="tab:orange", lw=1.0,
                label="analytic density")
    ax.set_xlabel("t")
    ax.set_ylabel("density")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def render_table(csv_path, png_path):
    header, cols = read_csv_columns(csv_path)
    require_columns(header, _SCHEMAS["table"], csv_path)
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.loglog(cols["epsilon_s"], cols["target_P"], "o-", color="tab:blue")
    ax.set_xlabel("window half-width epsilon (s)")
    ax.set_ylabel("detection probability")
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


_SCRIPT_HEADER = '''\
#!/usr/bin/env python3
"""Regenerate figures from result CSVs. Auto-generated; edit freely."""
import csv

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) if v else float("nan") for v in row] for row in reader]
    return {name: [r[i] for r in rows] for i, name in enumerate(header)}

'''

_SCRIPT_BODIES = {
    "backflow": '''\
data = load({path!r})
fig, ax = plt.subplots(figsize=(6.0, 4.0))
ax.plot(data["t_prime"], data["normalized_density"], "-", color="tab:blue",
        label="normalized arrival density")
ax.plot(data["t_prime"], data["current"], "-.", color="tab:orange",
        label="current at x = 0")
ax.set_xscale("log")
ax.axhline(0.0, color="gray", lw=0.6)
ax.set_xlabel("dimensionless time t'")
ax.legend(frameon=False)
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
plt.close(fig)
''',
    "superposition": '''\
data = load({path!r})
fig, ax = plt.subplots(figsize=(6.0, 4.0))
ax.plot(data["t"], data["normalized_density"], "-", color="tab:blue",
        label="normalized arrival density")
ax.plot(data["t"], data["current"], "--", color="tab:orange",
        label="current at detector")
ax.axhline(0.0, color="gray", lw=0.6)
ax.set_xlabel("t")
ax.legend(frameon=False)
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
plt.close(fig)
''',
    "density": '''\
data = load({path!r})
fig, ax = plt.subplots(figsize=(6.0, 4.0))
ax.plot(data["t"], data["density"], "-", color="tab:blue",
        label="arrival density")
ax.set_xlabel("t")
ax.set_ylabel("density")
ax.legend(frameon=False)
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
plt.close(fig)
''',
    "sample": '''\
data = load({path!r})
fig, ax = plt.subplots(figsize=(6.0, 4.0))
ax.errorbar(data["t"], data["density"], yerr=data["std_error"], fmt="o",
            ms=3, capsize=2, color="tab:blue", label="sampled arrival density")
ax.set_xlabel("t")
ax.set_ylabel("density")
ax.legend(frameon=False)
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
plt.close(fig)
''',
    "table": '''\
data = load({path!r})
fig, ax = plt.subplots(figsize=(5.0, 4.0))
ax.loglog(data["epsilon_s"], data["target_P"], "o-", color="tab:blue")
ax.set_xlabel("window half-width epsilon (s)")
ax.set_ylabel("detection probability")
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
plt.close(fig)
''',
}


def plot_script_text(csv_paths):
    """Deterministic standalone script reproducing the figures for the files."""
    chunks = [_SCRIPT_HEADER]
    for path in csv_paths:
        header, _ = read_csv_columns(path)
        kind = detect_schema(header)
        png = os.path.splitext(path)[0] + ".png"
        chunks.append(_SCRIPT_BODIES[kind].format(path=path, png=png))
        chunks.append("\n")
    return "".join(chunks[:-1] if len(chunks) > 1 else chunks)
