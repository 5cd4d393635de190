use std::fmt::Write as _;

use crate::scene::{Layout, Role, SceneSpec};

/// Pixels per meter.
pub const SCALE: f64 = 100.0;
/// Blank border around the room, in pixels.
pub const MARGIN: f64 = 20.0;

const UNIT_TINTS: [&str; 6] = [
    "#8ecae6", "#ffb703", "#90be6d", "#f4a3c0", "#b8a1e3", "#f9844a",
];
const FREE_FILL: &str = "#d9d9d9";

/// Maps a scene point to pixel coordinates, with y pointing down.
pub fn to_pixels(spec: &SceneSpec, p: [f64; 2]) -> [f64; 2] {
    [
        MARGIN + SCALE * p[0],
        MARGIN + SCALE * (spec.room.width - p[1]),
    ]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tint(spec: &SceneSpec, asset: usize) -> (&'static str, Option<&str>) {
    match spec.role(asset) {
        Role::Independent(_) => (FREE_FILL, None),
        Role::Anchor(k) | Role::Member(k, _) => (
            UNIT_TINTS[k % UNIT_TINTS.len()],
            Some(spec.units[k].id.as_str()),
        ),
    }
}

/// Top-down SVG of `layout`: the room, one rotated rectangle per posed
/// asset with a heading arrow and its id, units tinted per unit.
pub fn render_svg(spec: &SceneSpec, layout: &Layout) -> String {
    let w = 2.0 * MARGIN + SCALE * spec.room.length;
    let h = 2.0 * MARGIN + SCALE * spec.room.width;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(
        s,
        r##"<defs><marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="#c1121f"/></marker></defs>"##
    );
    let _ = writeln!(
        s,
        r##"<rect class="room" x="{MARGIN:.3}" y="{MARGIN:.3}" width="{:.3}" height="{:.3}" fill="#ffffff" stroke="#222222" stroke-width="2"/>"##,
        SCALE * spec.room.length,
        SCALE * spec.room.width
    );
    for (i, a) in spec.assets.iter().enumerate() {
        let Some(p) = layout.get(&a.id) else { continue };
        let b = a.footprint(p.planar());
        let (fill, unit) = tint(spec, i);
        let points: Vec<String> = b
            .corners()
            .iter()
            .map(|&c| {
                let [x, y] = to_pixels(spec, c);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = write!(s, r#"<g class="asset" data-id="{}""#, escape(&a.id));
        if let Some(u) = unit {
            let _ = write!(s, r#" data-unit="{}""#, escape(u));
        }
        let _ = writeln!(s, ">");
        let _ = writeln!(
            s,
            r##"  <polygon points="{}" fill="{fill}" fill-opacity="0.8" stroke="#333333" stroke-width="1"/>"##,
            points.join(" ")
        );
        let (sn, cs) = b.pose.theta.sin_cos();
        let len = 0.8 * b.half_l;
        let [x0, y0] = to_pixels(spec, [b.pose.x, b.pose.y]);
        let [x1, y1] = to_pixels(spec, [b.pose.x + len * cs, b.pose.y + len * sn]);
        let _ = writeln!(
            s,
            r##"  <line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y1:.3}" stroke="#c1121f" stroke-width="2" marker-end="url(#head)"/>"##
        );
        let _ = writeln!(
            s,
            r##"  <text x="{x0:.3}" y="{:.3}" font-family="sans-serif" font-size="11" text-anchor="middle" fill="#111111">{}</text>"##,
            y0 - 4.0,
            escape(&a.id)
        );
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    s
}
