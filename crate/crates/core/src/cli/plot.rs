//! Self-contained SVG line charts of sweep rows, one panel per jammer mode.

use std::fmt::Write as _;
use std::path::Path;

use super::sweep::{jammer_name, SweepRow};

const W: f64 = 520.0;
const H: f64 = 380.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 72.0;

struct Series {
    class: &'static str,
    label: &'static str,
    colour: &'static str,
    dash: &'static str,
    get: fn(&SweepRow) -> Option<f64>,
}

const CURVES: [Series; 3] = [
    Series { class: "closed", label: "closed form", colour: "#1f77b4", dash: "", get: |r| r.ip_closed },
    Series { class: "lemma1", label: "quadrature", colour: "#2ca02c", dash: "6 4", get: |r| r.ip_lemma1 },
    Series { class: "asymptotic", label: "asymptotic", colour: "#d62728", dash: "2 3", get: |r| r.ip_asymptotic },
];

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if !(hi > lo) {
        return ((lo - 0.05).max(0.0), (hi + 0.05).min(1.0));
    }
    let pad = 0.08 * (hi - lo);
    (((lo - pad) / 0.05).floor() * 0.05, ((hi + pad) / 0.05).ceil() * 0.05)
}

fn panel(s: &mut String, rows: &[&SweepRow], x0: f64, param: &str, jammer: bool) {
    let xs: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let (xmin, xmax) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (xmin, xmax) = if xmax > xmin { (xmin, xmax) } else { (xmin - 1.0, xmax + 1.0) };
    let mut ys: Vec<f64> = Vec::new();
    for r in rows {
        ys.extend([r.ip_mc, r.ci_lo, r.ci_hi].iter().flatten());
        ys.extend(CURVES.iter().filter_map(|c| (c.get)(r)));
    }
    let (ylo, yhi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (ymin, ymax) = if ys.is_empty() { (0.0, 1.0) } else { nice_range(ylo, yhi) };
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let px = |v: f64| x0 + LEFT + (v - xmin) / (xmax - xmin) * pw;
    let py = |v: f64| TOP + (ymax - v) / (ymax - ymin) * ph;

    let j = jammer_name(jammer);
    writeln!(s, "<g class=\"panel\" data-jammer=\"{j}\">").unwrap();
    writeln!(s, "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">IP vs {param}, jammer {j}</text>", x0 + LEFT + pw / 2.0)
        .unwrap();
    writeln!(
        s,
        "<rect x=\"{:.2}\" y=\"{TOP:.2}\" width=\"{pw:.2}\" height=\"{ph:.2}\" fill=\"none\" stroke=\"#444\"/>",
        x0 + LEFT
    )
    .unwrap();
    for k in 0..=4 {
        let xv = xmin + (xmax - xmin) * k as f64 / 4.0;
        let yv = ymin + (ymax - ymin) * k as f64 / 4.0;
        let (tx, ty) = (px(xv), py(yv));
        writeln!(s, "<line x1=\"{tx:.2}\" y1=\"{:.2}\" x2=\"{tx:.2}\" y2=\"{:.2}\" stroke=\"#444\"/>", TOP + ph, TOP + ph + 5.0).unwrap();
        writeln!(s, "<text x=\"{tx:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">{}</text>", TOP + ph + 18.0, fmt_tick(xv))
            .unwrap();
        writeln!(s, "<line x1=\"{:.2}\" y1=\"{ty:.2}\" x2=\"{:.2}\" y2=\"{ty:.2}\" stroke=\"#ddd\"/>", x0 + LEFT, x0 + LEFT + pw).unwrap();
        writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\">{:.3}</text>", x0 + LEFT - 6.0, ty + 4.0, yv)
            .unwrap();
    }
    writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"12\">{param}</text>", x0 + LEFT + pw / 2.0, TOP + ph + 36.0)
        .unwrap();

    for c in &CURVES {
        let pts: Vec<String> =
            rows.iter().filter_map(|r| (c.get)(r).map(|v| format!("{:.2},{:.2}", px(r.value), py(v)))).collect();
        if pts.is_empty() {
            continue;
        }
        let dash = if c.dash.is_empty() { String::new() } else { format!(" stroke-dasharray=\"{}\"", c.dash) };
        writeln!(
            s,
            "<polyline class=\"{}\" data-jammer=\"{j}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\"{dash} points=\"{}\"/>",
            c.class,
            c.colour,
            pts.join(" ")
        )
        .unwrap();
    }
    for r in rows {
        if let (Some(lo), Some(hi)) = (r.ci_lo, r.ci_hi) {
            let x = px(r.value);
            writeln!(
                s,
                "<line class=\"ci\" data-jammer=\"{j}\" x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#000\"/>",
                py(lo),
                py(hi)
            )
            .unwrap();
        }
        if let Some(v) = r.ip_mc {
            writeln!(
                s,
                "<circle class=\"mc\" data-jammer=\"{j}\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"none\" stroke=\"#000\"/>",
                px(r.value),
                py(v)
            )
            .unwrap();
        }
    }
    // legend
    let ly = TOP + ph + 54.0;
    let mut lx = x0 + LEFT;
    for c in &CURVES {
        if rows.iter().any(|r| (c.get)(r).is_some()) {
            let dash = if c.dash.is_empty() { String::new() } else { format!(" stroke-dasharray=\"{}\"", c.dash) };
            writeln!(s, "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{}\" stroke-width=\"1.8\"{dash}/>", lx + 22.0, c.colour)
                .unwrap();
            writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{}</text>", lx + 26.0, ly + 4.0, c.label).unwrap();
            lx += 110.0;
        }
    }
    if rows.iter().any(|r| r.ip_mc.is_some()) {
        writeln!(s, "<circle cx=\"{:.2}\" cy=\"{ly:.2}\" r=\"3\" fill=\"none\" stroke=\"#000\"/>", lx + 8.0).unwrap();
        writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">Monte Carlo</text>", lx + 26.0, ly + 4.0).unwrap();
    }
    writeln!(s, "</g>").unwrap();
}

fn fmt_tick(v: f64) -> String {
    let t = format!("{v:.3}");
    let t = t.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

pub fn render_svg(rows: &[SweepRow]) -> Result<String, String> {
    if rows.is_empty() {
        return Err("no rows to plot".into());
    }
    if rows.len() < 2 {
        return Err("a plot needs at least two rows".into());
    }
    let param = &rows[0].param;
    if rows.iter().any(|r| &r.param != param) {
        return Err("rows mix sweep parameters".into());
    }
    let modes: Vec<bool> = [true, false].into_iter().filter(|m| rows.iter().any(|r| r.jammer == *m)).collect();
    let width = W * modes.len() as f64;
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{H:.0}\" viewBox=\"0 0 {width:.0} {H:.0}\" font-family=\"sans-serif\">"
    )
    .unwrap();
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>").unwrap();
    for (k, &m) in modes.iter().enumerate() {
        let mut sel: Vec<&SweepRow> = rows.iter().filter(|r| r.jammer == m).collect();
        sel.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap_or(std::cmp::Ordering::Equal));
        panel(&mut s, &sel, W * k as f64, param, m);
    }
    writeln!(s, "</svg>").unwrap();
    Ok(s)
}

pub fn emit_plot(rows: &[SweepRow], path: &Path) -> Result<(), String> {
    let svg = render_svg(rows)?;
    std::fs::write(path, svg).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(value: f64, jammer: bool, ip: f64) -> SweepRow {
        SweepRow {
            param: "gamma_i".into(),
            value,
            jammer,
            ip_mc: Some(ip + 0.001),
            ci_lo: Some(ip - 0.01),
            ci_hi: Some(ip + 0.01),
            ip_lemma1: Some(ip),
            ip_closed: Some(ip),
            ip_asymptotic: if jammer { Some(ip * 0.98) } else { None },
            n: Some(1000),
            seed: 1,
            elapsed_ms: 3,
        }
    }

    fn attr<'a>(el: &'a str, name: &str) -> &'a str {
        let key = format!(" {name}=\"");
        let i = el.find(&key).unwrap() + key.len();
        &el[i..i + el[i..].find('"').unwrap()]
    }

    #[test]
    fn two_points_two_markers() {
        let rows = vec![row(0.0, true, 0.6), row(5.0, true, 0.5)];
        let svg = render_svg(&rows).unwrap();
        assert_eq!(svg.matches("<circle class=\"mc\"").count(), 2);
        for class in ["closed", "lemma1", "asymptotic"] {
            let el = svg.lines().find(|l| l.contains(&format!("<polyline class=\"{class}\""))).unwrap();
            assert_eq!(attr(el, "points").split(' ').count(), 2);
        }
    }

    #[test]
    fn deterministic_bytes() {
        let rows = vec![row(0.0, true, 0.6), row(5.0, true, 0.5), row(0.0, false, 0.7), row(5.0, false, 0.65)];
        assert_eq!(render_svg(&rows).unwrap(), render_svg(&rows).unwrap());
        assert!(render_svg(&[]).is_err());
        assert!(render_svg(&rows[..1]).is_err());
    }

    #[test]
    fn descending_sweep_parses_back_descending() {
        let ips = [0.71, 0.64, 0.58, 0.555, 0.551, 0.55];
        let rows: Vec<SweepRow> =
            ips.iter().enumerate().flat_map(|(k, &v)| [row(5.0 * k as f64, true, v), row(5.0 * k as f64, false, v + 0.1)]).collect();
        let svg = render_svg(&rows).unwrap();
        for j in ["on", "off"] {
            let el = svg
                .lines()
                .find(|l| l.contains("<polyline class=\"closed\"") && l.contains(&format!("data-jammer=\"{j}\"")))
                .unwrap();
            let pts: Vec<(f64, f64)> = attr(el, "points")
                .split(' ')
                .map(|p| {
                    let (x, y) = p.split_once(',').unwrap();
                    (x.parse().unwrap(), y.parse().unwrap())
                })
                .collect();
            assert_eq!(pts.len(), ips.len());
            // x increases along the CSV order; IP falls, so the SVG y coordinate grows
            assert!(pts.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1), "{pts:?}");
        }
    }
}
