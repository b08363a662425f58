"""Bundle export to CSV, JSON and gnuplot, plus matplotlib figures."""
from __future__ import annotations

from pathlib import Path

from .runner import ResultBundle, Table

FORMATS = ("csv", "json", "gnuplot")


class ExportError(OSError):
    def __init__(self, path, cause: OSError):
        super().__init__(f"cannot write {path}: {cause.strerror or cause}")
        self.path = Path(path)


def _fmt(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write(path: Path, text: str):
    try:
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ExportError(path, exc) from None


def _file_stem(section: str, table: Table) -> str:
    return section if table.name == section else f"{section}_{table.name}"


def table_csv(section: str, table: Table) -> str:
    names = [c[0] for c in table.columns]
    units = " ".join(f"{n}[{u}]" for n, u in table.columns)
    lines = [f"# wgmlab {section}/{table.name}", f"# units: {units}", ",".join(names)]
    lines += [",".join(_fmt(v) for v in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def table_dat(section: str, table: Table) -> str:
    """Whitespace-separated data; the trailing config_id column is dropped."""
    cols = [c for c in table.columns if c[0] != "config_id"]
    head = "  ".join(f"{n}[{u}]" for n, u in cols)
    lines = [f"# wgmlab {section}/{table.name}", f"# {head}"]
    lines += [" ".join(_fmt(v) for v in row[:len(cols)]) for row in table.rows]
    return "\n".join(lines) + "\n"


def checks_csv(bundle: ResultBundle) -> str:
    lines = ["# wgmlab invariant checks", "# units: section[-] check[-] passed[-]",
             "section,check,passed"]
    lines += [f"{s},{c.name.replace(',', ';')},{_fmt(c.passed)}" for s, c in bundle.checks]
    return "\n".join(lines) + "\n"


def export(bundle: ResultBundle, path, fmt: str = "csv") -> list:
    """Write ``bundle`` under directory ``path``; returns the files written."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExportError(out, exc) from None
    written = []

    def put(name, text):
        p = out / name
        _write(p, text)
        written.append(p)

    if fmt == "json":
        put("bundle.json", bundle.to_json() + "\n")
    elif fmt == "csv":
        for sec in bundle.sections:
            for t in sec.tables:
                put(_file_stem(sec.name, t) + ".csv", table_csv(sec.name, t))
        put("checks.csv", checks_csv(bundle))
    else:
        for sec in bundle.sections:
            for t in sec.tables:
                put(_file_stem(sec.name, t) + ".dat", table_dat(sec.name, t))
        put("wgmlab.gp", gnuplot_script(bundle))
    return written


def _rec(bundle, section, key, default=None):
    try:
        return bundle.section(section).records.get(key, default)
    except KeyError:
        return default


def gnuplot_script(bundle: ResultBundle) -> str:
    names = {s.name for s in bundle.sections}
    g = ['# gnuplot script generated by wgmlab; run: gnuplot wgmlab.gp',
         'set terminal pngcairo size 900,600', 'set key top right', 'set grid']
    if "potential" in names:
        E0, s0 = _rec(bundle, "potential", "E_0"), _rec(bundle, "potential", "s_0")
        Em, rho = _rec(bundle, "potential", "E_marker"), _rec(bundle, "potential", "rho_marker")
        vmax = 3.0 * E0
        g += ['set output "potential.png"', 'set xlabel "s"', 'set ylabel "V_c"',
              f'set yrange [0:{vmax!r}]',
              f'set arrow 1 from graph 0, first {E0!r} to graph 1, first {E0!r} nohead dt 2',
              f'set label 1 "E_0" at graph 0.02, first {E0!r} offset 0,0.7',
              f'set arrow 2 from {s0!r}, graph 0 to {s0!r}, graph 1 nohead dt 3',
              f'set label 2 "s_0" at {s0!r}, graph 0.95 offset 0.5,0']
        if rho is not None:
            g += [f'set arrow 3 from graph 0, first {Em!r} to graph 1, first {Em!r} nohead dt 4',
                  f'set label 3 "rho_E" at {rho!r}, first {Em!r} point pt 7 offset -1,1']
        g += ['plot "potential.dat" using 1:4 with lines lw 2 title "V_c"',
              'unset arrow', 'unset label', 'set yrange [*:*]']
    if "agmon" in names:
        s0 = _rec(bundle, "potential", "s_0")
        g += ['set output "agmon.png"', 'set xlabel "s"', 'set ylabel "d_{A,E}"']
        if s0 is not None:
            g += [f'set arrow 1 from {s0!r}, graph 0 to {s0!r}, graph 1 nohead dt 3']
        g += ['plot "agmon.dat" using 1:2 with lines lw 2 title "Agmon distance"', 'unset arrow']
    if "decay" in names:
        d, c = _rec(bundle, "decay", "d_fit"), _rec(bundle, "decay", "intercept")
        g += ['set output "decay.png"', 'set xlabel "n"', 'set ylabel "log ||u_n||_{L^2(omega)}"',
              f'fit_line(x) = {c!r} - {d!r}*x',
              'plot "decay.dat" using 1:(log($6)) with points pt 7 title "log mass", '
              'fit_line(x) with lines dt 2 title "fit"']
    if "quasimode" in names:
        g += ['set output "quasimode.png"', 'set logscale xy', 'set xlabel "h"',
              'set ylabel "residual"',
              'plot "quasimode.dat" using 1:3 with linespoints pt 7 title "residual"',
              'unset logscale']
    if "waves" in names:
        g += ['set output "waves.png"', 'set xlabel "Lambda"', 'set ylabel "log ||w_n||"',
              'plot "waves.dat" using 3:(log($7)) with linespoints pt 7 title "space-time norm"']
    return "\n".join(g) + "\n"


def render_figures(bundle: ResultBundle, path) -> list:
    """PNG figures for every section that has plottable data."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExportError(out, exc) from None
    written = []

    def col(table, name):
        k = [c[0] for c in table.columns].index(name)
        return np.array([np.nan if r[k] is None else r[k] for r in table.rows], dtype=float)

    def save(fig, name):
        p = out / name
        try:
            fig.savefig(p, dpi=110, metadata={"Software": None})
        except OSError as exc:
            raise ExportError(p, exc) from None
        finally:
            plt.close(fig)
        written.append(p)

    names = {s.name for s in bundle.sections}
    if "potential" in names:
        sec = bundle.section("potential")
        t, r = sec.tables[0], sec.records
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(col(t, "s"), col(t, "V_c"), lw=2, label="$V_c$")
        ax.axhline(r["E_0"], ls="--", color="gray", label="$E_0$")
        ax.axvline(r["s_0"], ls=":", color="k")
        if r.get("rho_marker") is not None:
            ax.axhline(r["E_marker"], ls="-.", color="tab:orange", lw=1, label="$E$")
            ax.plot([r["rho_marker"]], [r["E_marker"]], "o", color="tab:red", label=r"$\rho_E$")
        ax.set_ylim(0, 3 * r["E_0"])
        ax.set_xlabel("s")
        ax.set_ylabel("$V_c$")
        ax.legend()
        save(fig, "potential.png")
    if "agmon" in names:
        sec = bundle.section("agmon")
        t = sec.tables[0]
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(col(t, "s"), col(t, "d"), lw=2)
        ax.axvline(sec.records["rho_E"], ls=":", color="tab:red")
        if "potential" in names:
            ax.axvline(bundle.section("potential").records["s_0"], ls=":", color="k")
        ax.set_xlabel("s")
        ax.set_ylabel("$d_{A,E}$")
        save(fig, "agmon.png")
    if "decay" in names:
        sec = bundle.section("decay")
        t, r = sec.tables[0], sec.records
        n, m = col(t, "n"), col(t, "mass_omega")
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.semilogy(n, m, "o", label=r"$\|u_n\|_{L^2(\omega)}$")
        ax.semilogy(n, np.exp(r["intercept"] - r["d_fit"] * n), "--",
                    label=f"fit, d={r['d_fit']:.4f}")
        ax.semilogy(n, m[0] * np.exp(-r["d_pred"] * (n - n[0])), ":",
                    label=f"rate d_pred={r['d_pred']:.4f}")
        ax.set_xlabel("n")
        ax.legend()
        save(fig, "decay.png")
    if "quasimode" in names:
        t = bundle.section("quasimode").tables[0]
        fig, ax = plt.subplots(figsize=(6, 4))
        h, res = col(t, "h"), col(t, "residual")
        ax.loglog(h, res, "o-", label="residual")
        ax.loglog(h, res[0] * (h / h[0]) ** (2 / 3), "--", label="$h^{2/3}$")
        ax.set_xlabel("h")
        ax.legend()
        save(fig, "quasimode.png")
    if "waves" in names:
        t = bundle.section("waves").tables[0]
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.semilogy(col(t, "Lambda"), col(t, "spacetime_norm"), "o-")
        ax.set_xlabel(r"$\Lambda$")
        ax.set_ylabel(r"$\|w_n\|_{L^2((0,T)\times\omega)}$")
        save(fig, "waves.png")
    return written
