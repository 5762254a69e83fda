use std::fmt::Write;

use crate::error::{Error, Result};
use crate::graphical::HarrisSystem;

use super::propagate::InfectedIntervalSet;

pub const PX_PER_TIME: f64 = 8.0;
pub const PX_PER_SITE: f64 = 24.0;
const MARGIN: f64 = 24.0;

/// SVG space-time diagram of a one-dimensional system over `[t_lo, t_hi]`.
///
/// Time runs downwards. Timelines, renewal ticks, arrows active at `lambda`
/// and infected intervals carry the classes `timeline`, `mark`, `arrow` and
/// `infected` respectively.
pub fn render_svg(
    system: &HarrisSystem,
    lambda: f64,
    infected: Option<&InfectedIntervalSet>,
    t_lo: f64,
    t_hi: f64,
) -> Result<String> {
    let threshold = system.check_lambda(lambda)?;
    let lattice = system.lattice();
    if lattice.dim() != 1 {
        return Err(Error::Precondition(
            "diagrams need a one-dimensional lattice".into(),
        ));
    }
    let n = lattice.num_sites();
    let x = |site: usize| MARGIN + site as f64 * PX_PER_SITE;
    let y = |t: f64| MARGIN + (t - t_lo) * PX_PER_TIME;
    let width = 2.0 * MARGIN + (n.saturating_sub(1)) as f64 * PX_PER_SITE;
    let height = 2.0 * MARGIN + (t_hi - t_lo) * PX_PER_TIME;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    s.push_str(concat!(
        "<defs><marker id=\"head\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" orient=\"auto\">",
        "<path d=\"M0,0 L6,3 L0,6 z\" fill=\"#c33\"/></marker></defs>\n",
        "<style>.timeline{stroke:#888;stroke-width:1}.mark{stroke:#000;stroke-width:2}",
        ".arrow{stroke:#c33;stroke-width:1;marker-end:url(#head)}.infected{stroke:#36c;stroke-width:5;opacity:.6}</style>\n",
    ));
    for site in 0..n {
        let _ = writeln!(
            s,
            r#"<line class="timeline" x1="{0}" y1="{1}" x2="{0}" y2="{2}"/>"#,
            x(site),
            y(t_lo),
            y(t_hi)
        );
    }
    if let Some(set) = infected {
        for (site, iv) in set.iter() {
            let (a, b) = (iv.start.max(t_lo), iv.end.min(t_hi));
            if a <= b {
                let _ = writeln!(
                    s,
                    r#"<line class="infected" x1="{0}" y1="{1}" x2="{0}" y2="{2}"/>"#,
                    x(site),
                    y(a),
                    y(b)
                );
            }
        }
    }
    for site in 0..n {
        for &m in system.train(site).marks_in(t_lo, t_hi) {
            let _ = writeln!(
                s,
                r#"<line class="mark" x1="{}" y1="{2}" x2="{}" y2="{2}"/>"#,
                x(site) - 5.0,
                x(site) + 5.0,
                y(m)
            );
        }
    }
    for (e, &(from, to)) in system.edges().iter().enumerate() {
        for a in system.edge_arrows(e) {
            if a.mark <= threshold && a.time >= t_lo && a.time <= t_hi {
                let _ = writeln!(
                    s,
                    r#"<line class="arrow" x1="{}" y1="{2}" x2="{}" y2="{2}"/>"#,
                    x(from),
                    x(to),
                    y(a.time)
                );
            }
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}
