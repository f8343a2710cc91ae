//! Static SVG trajectory plot.

use std::fmt::Write;

use swarmsafe::config::ControllerConfig;
use swarmsafe::sim::Trace;
use swarmsafe::Vec2;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Trajectories with hollow start markers and filled end markers drawn to
/// scale, plus density references for coverage runs.
pub fn trajectories_svg(trace: &Trace) -> String {
    let b = trace.config.safety.bounds;
    let scale = (SIZE - 2.0 * MARGIN) / b.width().max(b.height());
    let px = |p: Vec2| (MARGIN + (p.x - b.left) * scale, MARGIN + (b.top - p.y) * scale);
    let r = trace.config.robot_radius * scale;
    let (w, h) = (2.0 * MARGIN + b.width() * scale, 2.0 * MARGIN + b.height() * scale);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.1} {h:.1}">"#);
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{:.1}" height="{:.1}" fill="none" stroke="#333" stroke-width="2"/>"##,
        b.width() * scale,
        b.height() * scale
    );
    if let ControllerConfig::Coverage { refs, sigma, .. } = &trace.config.controller {
        for d in refs {
            let (x, y) = px(d.position);
            let _ = writeln!(s, r##"<circle cx="{x:.1}" cy="{y:.1}" r="{:.1}" fill="#f2c14e" fill-opacity="0.25"/>"##, 2.0 * sigma * scale);
            let _ = writeln!(s, r##"<path d="M{:.1},{y:.1}h12M{x:.1},{:.1}v12" stroke="#b8860b" stroke-width="2"/>"##, x - 6.0, y - 6.0);
        }
    }
    for i in 0..trace.robots() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        let start = px(trace.initial[i].position());
        let _ = write!(d, "M{:.1},{:.1}", start.0, start.1);
        for rec in trace.ticks.iter().step_by(5).chain(trace.ticks.last()) {
            let (x, y) = px(rec.poses[i].position());
            let _ = write!(d, "L{x:.1},{y:.1}");
        }
        let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        let _ =
            writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="{r:.1}" fill="none" stroke="{color}" stroke-width="2"/>"#, start.0, start.1);
        let end = trace.ticks.last().map_or(trace.initial[i], |rec| rec.poses[i]);
        let (x, y) = px(end.position());
        let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="{r:.1}" fill="{color}"/>"#);
        let (hx, hy) = px(end.position() + Vec2::new(end.theta.cos(), end.theta.sin()) * (2.0 * trace.config.robot_radius));
        let _ = writeln!(s, r##"<line x1="{x:.1}" y1="{y:.1}" x2="{hx:.1}" y2="{hy:.1}" stroke="#000" stroke-width="1.5"/>"##);
    }
    s.push_str("</svg>\n");
    s
}
