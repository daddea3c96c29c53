"""Ready-made benchmark scenarios.

open_field_scene reproduces the nominal campaign: 10000 observers over 1 km^2
(one per 10 x 10 m square on average), transmit power 10 dBW at 1 m, exponent
2, and top-15 selection.

urban_street_scene is the desk-scale hostile counterpart: a block grid with
the jammer tucked into a shallow alley notch whose beam a street wedge splits
into both corridor arms.  The strongest measurements then mix near-mouth
anchors with mirror-fed street points whose powers contradict any single
point-source pathloss explanation, which is what defeats the pathloss-only
estimators in this regime.
"""

from __future__ import annotations

from .field import JammerParams, Rect
from .propagation import BuildingMap, ScenarioConfig


def open_field_scene(inr_db: float = 20.0, n_samples: int = 10000, top_k: int = 15,
                     rng_seed: int = 0) -> ScenarioConfig:
    """Pathloss-regime campaign over 1 km^2 with a mid-area jammer."""
    return ScenarioConfig(
        jammer=JammerParams([400.0, 600.0], 10.0, 2.0),
        area=Rect(0.0, 1000.0, 0.0, 1000.0),
        n_samples=n_samples,
        top_k=top_k,
        inr_db=inr_db,
        regime="pathloss",
        d_f=1.0,
        rng_seed=rng_seed,
    )


def urban_polygons() -> tuple:
    """12 buildings: 10 city blocks, one block with an alley notch, one wedge."""
    polys = []
    for i in range(4):
        for j in range(3):
            if (i, j) == (1, 1):
                continue
            x0 = 40.0 + i * 90.0
            y0 = 50.0 + j * 110.0
            polys.append(((x0, y0), (x0 + 55.0, y0), (x0 + 55.0, y0 + 70.0), (x0, y0 + 70.0)))
    # block (1,1) with a 5 m x 7 m alley notched into its south face
    polys.append((
        (130.0, 160.0), (155.5, 160.0), (155.5, 167.0), (160.5, 167.0),
        (160.5, 160.0), (185.0, 160.0), (185.0, 230.0), (130.0, 230.0),
    ))
    # peaked street wedge below the alley mouth splitting the beam east/west
    polys.append(((146.0, 130.0), (158.0, 143.0), (170.0, 130.0)))
    return tuple(polys)


def urban_street_scene(inr_db: float = 20.0, n_samples: int = 3600, top_k: int = 15,
                       rng_seed: int = 0) -> ScenarioConfig:
    """Ray-traced street-canyon campaign with mirror-grade building walls."""
    return ScenarioConfig(
        jammer=JammerParams([158.0, 165.0], 10.0, 2.0),
        area=Rect(0.0, 400.0, 0.0, 400.0),
        n_samples=n_samples,
        top_k=top_k,
        inr_db=inr_db,
        regime="raytrace",
        buildings=BuildingMap(urban_polygons(), reflection_loss_db=0.0, max_reflections=2),
        d_f=1.0,
        rng_seed=rng_seed,
    )
