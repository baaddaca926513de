"""File formats: configuration dumps, experiment CSVs, verification JSONL.

All floats are printed with %.17g so that a dump/parse round trip
reproduces the binary float64 values exactly.
"""

import json

import numpy as np

FLOAT_FMT = "%.17g"


def _fmt(x):
    return FLOAT_FMT % float(x)


def write_config(stream, config, phi=None, n=None, p=None, psi=None):
    """Write a configuration: a comment header with the run parameters, then
    one `u <id> <ux> <uy>` line per vertex."""
    meta = []
    if phi is not None:
        meta.append("phi=" + _fmt(phi))
    if n is not None:
        meta.append("n=%d" % n)
    if p is not None:
        meta.append("p=" + _fmt(p))
    if psi is not None:
        meta.append("psi=%s" % psi)
    if meta:
        stream.write("# " + " ".join(meta) + "\n")
    for vid, (ux, uy) in enumerate(np.asarray(config, dtype=float)):
        stream.write("u %d %s %s\n" % (vid, _fmt(ux), _fmt(uy)))


def read_config(stream):
    """Parse a configuration dump.  Returns (config, meta dict)."""
    meta = {}
    rows = {}
    for line in stream:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    key, val = token.split("=", 1)
                    meta[key] = val
            continue
        parts = line.split()
        if parts[0] != "u" or len(parts) != 4:
            raise ValueError("bad config line: %r" % line)
        rows[int(parts[1])] = (float(parts[2]), float(parts[3]))
    if sorted(rows) != list(range(len(rows))):
        raise ValueError("config vertex ids are not 0..%d" % (len(rows) - 1))
    config = np.array([rows[i] for i in range(len(rows))])
    for key in ("phi", "p"):
        if key in meta:
            meta[key] = float(meta[key])
    if "n" in meta:
        meta["n"] = int(meta["n"])
    return config, meta


def write_sweep_csv(stream, record):
    """phi,eps_exp,energy,p_eps,min_det,nonpos_det_count,iters,converged"""
    stream.write("phi,eps_exp,energy,p_eps,min_det,nonpos_det_count,iters,converged\n")
    for phi, k, energy, p_eps, min_det, nonpos, iters, conv in record.rows():
        stream.write(
            "%s,%d,%s,%s,%s,%d,%d,%d\n"
            % (
                _fmt(phi),
                k,
                _fmt(energy),
                "" if p_eps is None else _fmt(p_eps),
                _fmt(min_det),
                nonpos,
                iters,
                1 if conv else 0,
            )
        )


def read_sweep_csv(stream):
    """Parse the sweep CSV back into a list of dicts."""
    header = stream.readline().strip().split(",")
    out = []
    for line in stream:
        line = line.strip()
        if not line:
            continue
        vals = line.split(",")
        row = dict(zip(header, vals))
        row["phi"] = float(row["phi"])
        row["eps_exp"] = int(row["eps_exp"])
        row["energy"] = float(row["energy"])
        row["p_eps"] = float(row["p_eps"]) if row["p_eps"] else None
        row["min_det"] = float(row["min_det"])
        row["nonpos_det_count"] = int(row["nonpos_det_count"])
        row["iters"] = int(row["iters"])
        row["converged"] = row["converged"] == "1"
        out.append(row)
    return out


def write_fold_csv(stream, phi, results):
    """phi,folds,energy,min_det,nonpos_det_count"""
    stream.write("phi,folds,energy,min_det,nonpos_det_count\n")
    for row in results:
        stream.write(
            "%s,%d,%s,%s,%d\n"
            % (
                _fmt(phi),
                row["folds"],
                _fmt(row["energy"]),
                _fmt(row["min_det"]),
                row["nonpos_det_count"],
            )
        )


def _jsonable(value):
    # numpy scalars leak in from the checks; json refuses them
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_verify_jsonl(stream, results):
    """One JSON object per check: {"check": ..., "pass": ..., "min_slack": ...}
    plus any extra keys the check reported."""
    for row in results:
        clean = {k: _jsonable(v) for k, v in row.items()}
        stream.write(json.dumps(clean, sort_keys=True) + "\n")
