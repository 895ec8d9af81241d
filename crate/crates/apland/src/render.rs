//! SVG heatmaps of parameter landscapes.
//!
//! Each grid cell is a rectangle centred on its `(F, C)` pair and filled by
//! its normalized G1 value through [`colormap`]. A star marks the best pair
//! and a circle marks the pair the adaptation method actually generated.
//! All coordinates are printed with fixed precision, so the output depends
//! only on the snapshot.

use std::fmt::Write;

use apland_core::profiler::LandscapeSnapshot;

const PLOT: f64 = 480.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 50.0;
const WIDTH: f64 = LEFT + PLOT + 30.0;
const HEIGHT: f64 = TOP + PLOT + 60.0;

/// Viridis anchor colours at `0, 0.25, 0.5, 0.75, 1`.
const ANCHORS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

/// Monotone colormap: piecewise-linear interpolation between the viridis
/// anchors (dark purple at 0, yellow at 1). Values outside `[0, 1]` clamp.
pub fn colormap(v: f64) -> [u8; 3] {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    let pos = v * (ANCHORS.len() - 1) as f64;
    let k = (pos.floor() as usize).min(ANCHORS.len() - 2);
    let t = pos - k as f64;
    let mut out = [0u8; 3];
    for (ch, o) in out.iter_mut().enumerate() {
        let a = ANCHORS[k][ch];
        let b = ANCHORS[k + 1][ch];
        *o = (a + (b - a) * t).round() as u8;
    }
    out
}

/// Renders a snapshot, or `None` when the landscape is flat.
pub fn render_svg(snap: &LandscapeSnapshot, grid: (usize, usize)) -> Option<String> {
    if snap.flat {
        return None;
    }
    let (k_f, k_c) = grid;
    let step_f = 1.0 / (k_f - 1) as f64;
    let step_c = 1.0 / (k_c - 1) as f64;
    // Data extent: cell centres span [0, 1], cells add half a step each side.
    let sx = |f: f64| LEFT + (f + step_f / 2.0) / (1.0 + step_f) * PLOT;
    let sy = |c: f64| TOP + PLOT - (c + step_c / 2.0) / (1.0 + step_c) * PLOT;
    let cell_w = PLOT * step_f / (1.0 + step_f);
    let cell_h = PLOT * step_c / (1.0 + step_c);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="13">"#
    );
    let m = &snap.meta;
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="15">{} run {}: FE {}, rank {}</text>"#,
        LEFT + PLOT / 2.0,
        m.function,
        m.run_id,
        m.fe,
        m.individual_rank
    );
    let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
    for (pair, v) in snap.pairs.iter().zip(&snap.g1_norm) {
        let [r, g, b] = colormap(*v);
        let _ = writeln!(
            s,
            r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
            sx(pair.f) - cell_w / 2.0,
            sy(pair.c) - cell_h / 2.0,
            cell_w + 0.05,
            cell_h + 0.05
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.1}" y="{TOP:.1}" width="{PLOT:.1}" height="{PLOT:.1}" fill="none" stroke="black"/>"#
    );
    for tick in 0..=5 {
        let v = tick as f64 / 5.0;
        let (x, y) = (sx(v), sy(v));
        let base = TOP + PLOT;
        let _ = writeln!(
            s,
            r#"<line x1="{x:.3}" y1="{base:.1}" x2="{x:.3}" y2="{:.1}" stroke="black"/><text x="{x:.3}" y="{:.1}" text-anchor="middle">{v:.1}</text>"#,
            base + 5.0,
            base + 20.0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{LEFT:.1}" y1="{y:.3}" x2="{:.1}" y2="{y:.3}" stroke="black"/><text x="{:.1}" y="{:.3}" text-anchor="end">{v:.1}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">F</text>"#,
        LEFT + PLOT / 2.0,
        TOP + PLOT + 42.0
    );
    let _ = writeln!(
        s,
        r#"<text x="22" y="{:.1}" text-anchor="middle" transform="rotate(-90 22 {:.1})">C</text>"#,
        TOP + PLOT / 2.0,
        TOP + PLOT / 2.0
    );

    let (bx, by) = (sx(snap.best_pair.f), sy(snap.best_pair.c));
    let _ = writeln!(
        s,
        r#"<polygon class="best" points="{}" fill="white" stroke="black" stroke-width="1.2"/>"#,
        star_points(bx, by, 11.0, 4.5)
    );
    let _ = writeln!(
        s,
        r#"<circle class="actual" cx="{:.3}" cy="{:.3}" r="7" fill="none" stroke="red" stroke-width="2.5"/>"#,
        sx(snap.actual_pair.f),
        sy(snap.actual_pair.c)
    );
    let _ = writeln!(s, "</svg>");
    Some(s)
}

/// Pixel position of a parameter pair, for tests and overlays.
pub fn pixel_of(f: f64, c: f64, grid: (usize, usize)) -> (f64, f64) {
    let step_f = 1.0 / (grid.0 - 1) as f64;
    let step_c = 1.0 / (grid.1 - 1) as f64;
    (
        LEFT + (f + step_f / 2.0) / (1.0 + step_f) * PLOT,
        TOP + PLOT - (c + step_c / 2.0) / (1.0 + step_c) * PLOT,
    )
}

fn star_points(cx: f64, cy: f64, outer: f64, inner: f64) -> String {
    (0..10)
        .map(|k| {
            let r = if k % 2 == 0 { outer } else { inner };
            let a = std::f64::consts::PI * (k as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
            format!("{:.3},{:.3}", cx + r * a.cos(), cy + r * a.sin())
        })
        .collect::<Vec<_>>()
        .join(" ")
}
