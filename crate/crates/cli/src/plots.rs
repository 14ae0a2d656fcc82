//! The standard set of figures for one trajectory.

use crate::output::Table;
use crate::svg::{Plot, Series};

fn xy(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    x.iter().copied().zip(y.iter().copied()).collect()
}

fn time_plot(title: &str, y_label: &str, series: Vec<Series>) -> Plot {
    Plot {
        title: title.into(),
        x_label: "t".into(),
        y_label: y_label.into(),
        series,
        equal_aspect: false,
    }
}

fn cartesian(t: &Table) -> Option<Vec<(f64, f64)>> {
    let r = t.column("r")?;
    let th = t.column("theta")?;
    Some(r.iter().zip(th).map(|(r, th)| (r * th.cos(), r * th.sin())).collect())
}

/// Returns `(file name, svg)` pairs for every figure whose columns exist.
pub fn standard_plots(traj: &Table, classical: Option<&Table>) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let Some(t) = traj.column("t") else {
        return out;
    };
    let companion = |name: &str| -> Option<Series> {
        let c = classical?;
        Some(Series::new("classical", xy(c.column("t")?, c.column(name)?)).dashed())
    };

    for (name, file) in [("r", "r.svg"), ("p_r", "p_r.svg")] {
        if let Some(y) = traj.column(name) {
            let mut s = vec![Series::new("moments", xy(t, y))];
            s.extend(companion(name));
            out.push((file.into(), time_plot(&format!("{name}(t)"), name, s).to_svg()));
        }
    }

    if let Some(pts) = cartesian(traj) {
        let mut s = vec![Series::new("moments", pts)];
        if let Some(c) = classical.and_then(cartesian) {
            s.push(Series::new("classical", c).dashed());
        }
        let p = Plot {
            title: "orbit".into(),
            x_label: "r cos(theta)".into(),
            y_label: "r sin(theta)".into(),
            series: s,
            equal_aspect: true,
        };
        out.push(("orbit.svg".into(), p.to_svg()));
    }

    if let (Some(r), Some(p)) = (traj.column("r"), traj.column("p_r")) {
        let mut s = vec![Series::new("moments", xy(r, p))];
        if let Some(c) = classical {
            if let (Some(cr), Some(cp)) = (c.column("r"), c.column("p_r")) {
                s.push(Series::new("classical", xy(cr, cp)).dashed());
            }
        }
        let plot = Plot {
            title: "phase space".into(),
            x_label: "r".into(),
            y_label: "p_r".into(),
            series: s,
            equal_aspect: false,
        };
        out.push(("phase_space.svg".into(), plot.to_svg()));
    }

    if let Some(h) = traj.column("H_Q") {
        let drift: Vec<f64> = h.iter().map(|v| v - h[0]).collect();
        out.push((
            "energy.svg".into(),
            time_plot("energy drift", "H_Q(t) - H_Q(0)", vec![Series::new("H_Q", xy(t, &drift))]).to_svg(),
        ));
    }

    // margin columns follow the canonical pairs, which follow `t` in the header
    let margins: Vec<Series> = traj
        .headers
        .iter()
        .zip(&traj.columns)
        .filter(|(h, _)| h.starts_with("margin_"))
        .enumerate()
        .map(|(d, (h, c))| {
            let label = match (traj.headers.get(1 + 2 * d), traj.headers.get(2 + 2 * d)) {
                (Some(q), Some(p)) if *h == format!("margin_{q}_{p}") => format!("({q}, {p})"),
                _ => h.clone(),
            };
            Series::new(label, xy(t, c))
        })
        .collect();
    if !margins.is_empty() {
        out.push((
            "uncertainty.svg".into(),
            time_plot("uncertainty margin", "G20 G02 - G11^2 - hbar^2/4", margins).to_svg(),
        ));
    }

    if let Some((h, c)) = traj.headers.iter().zip(&traj.columns).find(|(h, _)| h.starts_with("ratio_")) {
        out.push((
            "dispersion_ratio.svg".into(),
            time_plot("dispersion ratio", "sqrt(G20 / G02)", vec![Series::new(h.clone(), xy(t, c))]).to_svg(),
        ));
    }
    out
}
