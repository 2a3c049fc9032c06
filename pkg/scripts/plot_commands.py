#!/usr/bin/env python3
"""Emit a gnuplot command file for region/power CSVs produced by the CLI.

Usage:
    python scripts/plot_commands.py region out/region.csv [out/region.static.csv] > region.gp
    python scripts/plot_commands.py power out/power.csv > power.gp
    gnuplot -p region.gp

Keeps the core free of graphics dependencies; the CSVs stay the source of truth.
"""

import sys


def region(paths):
    lines = [
        'set datafile separator ","',
        'set xlabel "distortion D"',
        'set ylabel "rate R [bits/use]"',
        "set key bottom right",
        "set grid",
    ]
    plots = [f'"{paths[0]}" using 1:2 with linespoints title "fading"']
    if len(paths) > 1:
        plots.append(f'"{paths[1]}" using 1:2 with linespoints title "static g=1"')
    lines.append("plot " + ", \\\n     ".join(plots))
    return lines


def power(paths):
    return [
        'set datafile separator ","',
        'set xlabel "distortion D"',
        'set ylabel "minimum average power"',
        "set key top right",
        "set grid",
        # long format: one curve per target rate
        f'plot for [r in system("tail -n +2 {paths[0]} | cut -d, -f1 | sort -u")] \\',
        f'     "< awk -F, -v r=\'\'.r.\'\' \'$1 == r\' {paths[0]}" using 2:3 '
        'with linespoints title "R = ".r',
    ]


def main():
    if len(sys.argv) < 3 or sys.argv[1] not in ("region", "power"):
        sys.stderr.write(__doc__)
        return 2
    kind, paths = sys.argv[1], sys.argv[2:]
    emit = region if kind == "region" else power
    sys.stdout.write("\n".join(emit(paths)) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
