"""
Power curves
============

A small Monte-Carlo study in the fixed-dependence setting: five X columns
drive Y and the remaining columns are noise.  As p grows the average and
joint statistics lose power while the maximum holds on.

The full-size studies are available as presets (``figure1``, ``figure2``
and their ``-paper-scale`` variants).
"""

from maxmarginal import Panel, StudyConfig, power_study

config = StudyConfig(
    panels=(
        Panel("fixed_dep", "quadratic", 100, (5, 20, 100)),
        Panel("fixed_dep", "independent", 100, (5, 20, 100)),
    ),
    replicates=60,
    seed=0,
)
curves = power_study(config)

print(f"{'relationship':13} {'method':6}" + "".join(f"  p={v:<5}" for v in (5, 20, 100)))
for c in curves:
    cells = "".join(f"  {pw:.2f}   " for pw in c.power)
    print(f"{c.relationship:13} {c.method:6}{cells}")
