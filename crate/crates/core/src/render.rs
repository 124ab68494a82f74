//! SVG and JSON output for portraits.

use crate::integrate::{Family, Portrait};
use std::fmt::Write;

const CANVAS: f64 = 600.0;

fn polyline_path(points: &[[f64; 2]], to_px: impl Fn([f64; 2]) -> (f64, f64)) -> String {
    let mut d = String::new();
    for (i, p) in points.iter().enumerate() {
        let (x, y) = to_px(*p);
        let _ = write!(d, "{}{x:.3},{y:.3}", if i == 0 { "M" } else { " L" });
    }
    d
}

/// Renders the portrait as a standalone SVG document.
///
/// The chart disk fills the canvas with `y` pointing up. Family curves use
/// the `family-1` / `family-2` classes, separatrix branches additionally
/// carry `separatrix`, and the umbilic is a dot. A leading comment records the
/// verdict and the fiber singularities.
pub fn portrait_svg(portrait: &Portrait) -> String {
    let r = portrait.radius;
    let half = CANVAS / 2.0;
    let scale = 0.95 * half / r;
    let to_px = |p: [f64; 2]| (half + scale * p[0], half - scale * p[1]);
    let v = &portrait.verdict;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(svg, "<!--");
    let _ = writeln!(svg, "  verdict: {}", v.class);
    let _ = writeln!(svg, "  jet: a1={:.9} a2={:.9} b1={:.9} b2={:.9}", v.jet.a1, v.jet.a2, v.jet.b1, v.jet.b2);
    let _ = writeln!(svg, "  radius: {r}");
    let _ = writeln!(svg, "  z            beta2        beta3        kind");
    for s in &v.singularities {
        let _ = writeln!(svg, "  {:<12.6} {:<12.6} {:<12.6} {}", s.z, s.beta2, s.beta3, s.kind);
    }
    let _ = writeln!(svg, "-->");
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    let _ = writeln!(
        svg,
        "<style>\n  path {{ fill: none; stroke-width: 1; }}\n  .family-1 {{ stroke: #1f5fa8; }}\n  .family-2 {{ stroke: #c4472b; }}\n  .separatrix {{ stroke: #111; stroke-width: 2.2; }}\n  .umbilic {{ fill: #111; }}\n  .boundary {{ fill: none; stroke: #bbb; stroke-dasharray: 4 3; }}\n</style>"
    );
    let _ = writeln!(svg, r#"<circle class="boundary" cx="{half}" cy="{half}" r="{:.3}"/>"#, scale * r);
    for family in [Family::One, Family::Two] {
        if !portrait.families.contains(&family) {
            continue;
        }
        let _ = writeln!(svg, r#"<g class="family-{family}">"#);
        for c in portrait.curves.iter().filter(|c| c.family == family) {
            let _ = writeln!(svg, r#"  <path d="{}"/>"#, polyline_path(&c.points, to_px));
        }
        let _ = writeln!(svg, "</g>");
    }
    let _ = writeln!(svg, r#"<g class="separatrices">"#);
    for s in &portrait.separatrices {
        let _ = writeln!(
            svg,
            r#"  <path class="separatrix family-{}" data-z="{:.9}" data-branch="{}" d="{}"/>"#,
            s.family,
            s.source.z,
            s.branch,
            polyline_path(&s.points, to_px)
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r#"<circle class="umbilic" cx="{half}" cy="{half}" r="4"/>"#);
    let _ = writeln!(svg, "</svg>");
    svg
}

/// Full portrait geometry as pretty-printed JSON.
pub fn portrait_json(portrait: &Portrait) -> serde_json::Result<String> {
    serde_json::to_string_pretty(portrait)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{build_portrait, PortraitOptions};
    use crate::surfaces::{HostSurface, Surface};

    fn portrait(a: f64, b: f64, c: f64, families: Vec<Family>) -> Portrait {
        let s = Surface::rotation(HostSurface::NullHyperplane, 0.0, a, b, c).unwrap();
        let mut opts = PortraitOptions::new(0.2, 6);
        opts.families = families;
        build_portrait(&s, &opts).unwrap()
    }

    #[test]
    fn svg_marks_each_separatrix_direction() {
        for ((a, b, c), n) in [((3.0, 1.0, 0.0), 1), ((1.0, 2.0, 5.0), 3)] {
            let svg = portrait_svg(&portrait(a, b, c, Family::BOTH.to_vec()));
            assert_eq!(svg.matches(r#"class="separatrix"#).count(), 2 * n);
            assert!(svg.contains("<circle class=\"umbilic\""));
            assert!(svg.trim_end().ends_with("</svg>"));
        }
    }

    #[test]
    fn svg_metadata_lists_roots() {
        let svg = portrait_svg(&portrait(3.0, 2.0, 1.0, Family::BOTH.to_vec()));
        let comment = &svg[svg.find("<!--").unwrap()..svg.find("-->").unwrap()];
        assert!(comment.contains("verdict: D2"));
        assert_eq!(comment.matches("saddle").count(), 2);
        assert_eq!(comment.matches("node").count(), 1);
    }

    #[test]
    fn single_family_svg() {
        let svg = portrait_svg(&portrait(3.0, 2.0, 1.0, vec![Family::One]));
        assert!(svg.contains(r#"<g class="family-1">"#));
        assert!(!svg.contains(r#"<g class="family-2">"#));
        assert!(!svg.contains("separatrix family-2"));
    }

    #[test]
    fn json_round_trips() {
        let p = portrait(3.0, 1.0, 0.0, Family::BOTH.to_vec());
        let back: Portrait = serde_json::from_str(&portrait_json(&p).unwrap()).unwrap();
        assert_eq!(back.verdict.class, p.verdict.class);
        assert_eq!(back.curves.len(), p.curves.len());
    }
}
