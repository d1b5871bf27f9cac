use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use resoline::asymptotics::{
    cartwright_integral, g_function_experiment, indicator_estimate, indicator_pattern, indicator_width,
    lower_near_real_sectors, nevanlinna_residual, zero_density, DensityReport,
};
use resoline::czeros::{bound_states, find_zeros, resonances, Rect};
use resoline::inverse::{recover_left, uniqueness_report, InverseProblemSpec};
use resoline::potential::random_potential;
use resoline::scattering::sample_grid;
use resoline::wavekernel::{solve_kernels, KernelPiece, KernelTransform, KernelWindow};
use resoline::{Complex64, EntireFunction, Potential, ScatteringSample, XhatFn, YhatFn};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::options::{Function, Options};
use crate::output::{to_json, Outputs};
use crate::svg;

/// Result of a command: a summary for stdout, whether every threshold held,
/// and the files to write.
pub struct Outcome {
    pub summary: Value,
    pub pass: bool,
    pub outputs: Outputs,
}

fn required<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

fn positive(value: f64, flag: &str) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::Usage(format!("--{flag} must be positive, got {value}")))
    }
}

pub fn load_potential(path: &Path) -> Result<Potential, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(path, e))
}

fn potential(o: &Options) -> Result<Potential, CliError> {
    load_potential(required(&o.potential, "potential")?)
}

fn pair(o: &Options) -> Result<(Potential, Potential), CliError> {
    Ok((potential(o)?, load_potential(required(&o.potential2, "potential2")?)?))
}

fn num(e: impl std::fmt::Display) -> CliError {
    CliError::numerical(e)
}

fn status(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

pub fn scattering_grid(o: &Options) -> Result<Outcome, CliError> {
    let v = potential(o)?;
    let re = (o.re_min.unwrap_or(-20.0), o.re_max.unwrap_or(20.0));
    let im = (o.im_min.unwrap_or(-5.0), o.im_max.unwrap_or(5.0));
    let (n_re, n_im) = (o.n_re.unwrap_or(41), o.n_im.unwrap_or(41));
    if n_re == 0 || n_im == 0 || !(re.0 < re.1) || !(im.0 < im.1) {
        return Err(CliError::Usage("grid ranges must be increasing with at least one point".into()));
    }
    let tol = o.tolerance.unwrap_or(1e-8);
    let samples = sample_grid(&v, re, im, n_re, n_im);
    let worst = samples.iter().map(|s| s.residual_u).fold(0.0, f64::max);
    let pass = worst < tol;
    let mut outputs = Outputs::default();
    outputs.add(o.out.as_ref(), || {
        let mut s = format!("{}\n", ScatteringSample::CSV_HEADER);
        for row in &samples {
            s.push_str(&row.csv_row());
            s.push('\n');
        }
        s
    });
    outputs.add(o.svg.as_ref(), || {
        let rows: Vec<Vec<f64>> =
            samples.chunks(n_re).map(|row| row.iter().map(|s| s.xhat.norm().ln()).collect()).collect();
        svg::heatmap(&rows, re, im, "ln |X̂(k)|")
    });
    let summary = json!({
        "status": status(pass),
        "n_samples": samples.len(),
        "max_residual_u": worst,
        "tolerance": tol,
    });
    Ok(Outcome { summary, pass, outputs })
}

pub fn kernels(o: &Options) -> Result<Outcome, CliError> {
    let v = potential(o)?;
    let n = o.ngrid.unwrap_or(1024);
    let field = solve_kernels(&v, n).map_err(num)?;
    let pass = field.truncation_error.is_finite();
    #[derive(Serialize)]
    struct Report {
        status: &'static str,
        hull: (f64, f64),
        n_grid: usize,
        spacing: f64,
        truncation_error: f64,
        delta_prime_coeff: f64,
        delta_coeff: f64,
        x_norms: resoline::wavekernel::KernelNorms,
        y_norms: resoline::wavekernel::KernelNorms,
    }
    let report = Report {
        status: status(pass),
        hull: field.hull,
        n_grid: field.n_grid,
        spacing: field.spacing(),
        truncation_error: field.truncation_error,
        delta_prime_coeff: field.delta_prime_coeff,
        delta_coeff: field.delta_coeff,
        x_norms: field.x_norms(),
        y_norms: field.y_norms(),
    };
    let mut outputs = Outputs::default();
    outputs.add(o.out.as_ref(), || to_json(&report));
    outputs.add(o.csv.as_ref(), || field.x_csv());
    outputs.add(o.csv2.as_ref(), || field.y_csv());
    Ok(Outcome { summary: serde_json::to_value(&report).unwrap(), pass, outputs })
}

fn zero_points(zs: &resoline::czeros::ZeroSet) -> Vec<(f64, f64)> {
    zs.zeros.iter().map(|z| (z.location.re, z.location.im)).collect()
}

pub fn resonances_cmd(o: &Options) -> Result<Outcome, CliError> {
    let v = potential(o)?;
    let radius = positive(o.radius.unwrap_or(30.0), "radius")?;
    let zs = resonances(&v, radius).map_err(num)?;
    let mut outputs = Outputs::default();
    outputs.add(o.out.as_ref(), || to_json(&zs.to_file()));
    outputs.add(o.csv.as_ref(), || zs.to_csv());
    outputs.add(o.svg.as_ref(), || svg::zero_scatter(&zero_points(&zs), "resonances"));
    let summary = json!({
        "status": "pass",
        "radius": radius,
        "n_zeros": zs.len(),
        "total_multiplicity": zs.total_multiplicity(),
        "enclosing_winding": zs.enclosing_winding,
        "reflection_asymmetry": zs.reflection_asymmetry(1e-3),
    });
    Ok(Outcome { summary, pass: true, outputs })
}

pub fn bound_states_cmd(o: &Options) -> Result<Outcome, CliError> {
    let v = potential(o)?;
    let bs = bound_states(&v).map_err(num)?;
    let mut outputs = Outputs::default();
    outputs.add(o.out.as_ref(), || to_json(&bs));
    outputs.add(o.csv.as_ref(), || {
        let mut s = String::from("kappa,energy\n");
        for z in &bs.zeros.zeros {
            s.push_str(&format!("{},{}\n", z.location.im, -z.location.im * z.location.im));
        }
        s
    });
    let summary = json!({ "status": "pass", "n_bound_states": bs.energies.len(), "energies": bs.energies });
    Ok(Outcome { summary, pass: true, outputs })
}

/// Near-real sector densities of the resonances against `d/2π`, with `d`
/// the fitted indicator width of `X̂`.
struct DensityCheck {
    radius: f64,
    width_d: f64,
    expected: f64,
    tolerance: f64,
    sectors: Vec<DensityReport>,
    pass: bool,
}

fn density_check(v: &Potential, o: &Options) -> Result<DensityCheck, CliError> {
    let radius = positive(o.radius.unwrap_or(40.0), "radius")?;
    let r_max = positive(o.r_max.unwrap_or(640.0), "r-max")?;
    let tolerance = o.tolerance.unwrap_or(0.1);
    let width_d = indicator_width(&XhatFn(v), r_max).map_err(num)?.width;
    let expected = width_d / (2.0 * PI);
    let zs = resonances(v, radius).map_err(num)?;
    let sectors: Vec<DensityReport> =
        lower_near_real_sectors().iter().map(|&s| zero_density(&zs, s).with_width(width_d)).collect();
    let pass = sectors.iter().all(|d| (d.delta - expected).abs() <= tolerance * expected);
    Ok(DensityCheck { radius, width_d, expected, tolerance, sectors, pass })
}

fn density_outputs(check: &DensityCheck, o: &Options, outputs: &mut Outputs) {
    outputs.add(o.csv.as_ref(), || {
        let mut s = String::from("sector,r,n\n");
        for (i, d) in check.sectors.iter().enumerate() {
            for (r, n) in &d.counts {
                s.push_str(&format!("{i},{r},{n}\n"));
            }
        }
        s
    });
    outputs.add(o.svg.as_ref(), || {
        let series: Vec<(Vec<(f64, f64)>, f64)> =
            check.sectors.iter().map(|d| (d.counts.iter().map(|&(r, n)| (r, n as f64)).collect(), d.delta)).collect();
        svg::density_fit(&series, "resonance counts per near-real sector")
    });
}

fn density_json(check: &DensityCheck) -> Value {
    json!({
        "status": status(check.pass),
        "radius": check.radius,
        "width_d": check.width_d,
        "expected_density": check.expected,
        "tolerance": check.tolerance,
        "sectors": check.sectors,
    })
}

pub fn density(o: &Options) -> Result<Outcome, CliError> {
    let v = potential(o)?;
    let check = density_check(&v, o)?;
    let summary = density_json(&check);
    let mut outputs = Outputs::default();
    outputs.add(o.out.as_ref(), || to_json(&summary));
    density_outputs(&check, o, &mut outputs);
    Ok(Outcome { summary, pass: check.pass, outputs })
}

pub fn indicator(o: &Options) -> Result<Outcome, CliError> {
    let v = potential(o)?;
    let r_max = positive(o.r_max.unwrap_or(640.0), "r-max")?;
    let n_theta = o.n_theta.unwrap_or(24).max(3);
    let tol = o.tolerance.unwrap_or(0.05);
    let thetas: Vec<f64> = (0..n_theta).map(|i| -PI + (i as f64 + 0.5) * 2.0 * PI / n_theta as f64).collect();
    let field;
    let (f, expected): (Box<dyn EntireFunction>, f64) = match o.window {
        None => (Box::new(XhatFn(&v)), 2.0 * v.width()),
        Some(w) => {
            let r = positive(o.r_window.unwrap_or(0.1), "r-window")?;
            field = solve_kernels(&v, o.ngrid.unwrap_or(2048)).map_err(num)?;
            let piece = KernelPiece::Window(KernelWindow::new(w.kind(), r));
            let (lo, hi) = KernelWindow::new(w.kind(), r).interval(field.hull);
            (Box::new(KernelTransform { field: &field, piece }), hi - lo)
        }
    };
    let width = indicator_width(f.as_ref(), r_max).map_err(num)?;
    let pattern = indicator_pattern(f.as_ref(), &thetas, r_max).map_err(num)?;
    let pass = (width.width - expected).abs() <= tol * expected;
    let summary = json!({
        "status": status(pass),
        "r_max": r_max,
        "width": width.width,
        "expected_width": expected,
        "tolerance": tol,
        "h_up": width.up.h,
        "h_down": width.down.h,
        "pattern": pattern,
    });
    let mut outputs = Outputs::default();
    outputs.add(o.out.as_ref(), || to_json(&summary));
    outputs.add(o.csv.as_ref(), || {
        let mut s = String::from("theta,h\n");
        for (t, h) in pattern.thetas.iter().zip(&pattern.h) {
            s.push_str(&format!("{t},{h}\n"));
        }
        s
    });
    outputs.add(o.svg.as_ref(), || {
        let pts: Vec<(f64, f64)> = pattern.thetas.iter().copied().zip(pattern.h.iter().copied()).collect();
        let fit: Vec<(f64, f64)> = (0..=200)
            .map(|i| -PI + 2.0 * PI * i as f64 / 200.0)
            .map(|t| (t, pattern.sigma * t.sin().abs() + pattern.drift * t.sin()))
            .collect();
        let mut plot = svg::Svg::new(svg::Frame::around(&fit), "indicator h(θ)", "θ", "h");
        plot.polyline(&fit, "#2c7fb8");
        plot.markers(&pts, "#c0392b");
        plot.finish()
    });
    Ok(Outcome { summary, pass, outputs })
}

pub fn cartwright_check(o: &Options) -> Result<Outcome, CliError> {
    let v = potential(o)?;
    let cutoff = positive(o.cutoff.unwrap_or(100.0), "cutoff")?;
    let cart = cartwright_integral(&XhatFn(&v), cutoff).map_err(num)?;
    let check = density_check(&v, o)?;
    let pass = cart.converged && cart.value.is_finite() && check.pass;
    let mut summary = density_json(&check);
    summary["status"] = json!(status(pass));
    summary["cartwright"] = serde_json::to_value(&cart).unwrap();
    let mut outputs = Outputs::default();
    outputs.add(o.out.as_ref(), || to_json(&summary));
    density_outputs(&check, o, &mut outputs);
    Ok(Outcome { summary, pass, outputs })
}

pub fn nevanlinna_check(o: &Options) -> Result<Outcome, CliError> {
    let v = potential(o)?;
    let z = Complex64::new(o.z_re.unwrap_or(0.0), o.z_im.unwrap_or(2.0));
    if !(z.im > 0.0) {
        return Err(CliError::Usage("--z-im must be positive".into()));
    }
    let radius = positive(o.radius.unwrap_or(30.0), "radius")?;
    let r_max = positive(o.r_max.unwrap_or(640.0), "r-max")?;
    let cutoff = positive(o.cutoff.unwrap_or(400.0), "cutoff")?;
    let tol = o.tolerance.unwrap_or(0.05);
    let function = o.function.unwrap_or(Function::Yhat);
    let f: Box<dyn EntireFunction> = match function {
        Function::Xhat => Box::new(XhatFn(&v)),
        Function::Yhat => Box::new(YhatFn(&v)),
    };
    let rect = Rect::from_ranges((-radius, radius), (1e-6, radius)).map_err(num)?;
    let upper = find_zeros(f.as_ref(), rect, 10_000).map_err(num)?;
    let sigma_plus = indicator_estimate(f.as_ref(), FRAC_PI_2, r_max).map_err(num)?.h;
    let rep = nevanlinna_residual(f.as_ref(), &upper.locations(), sigma_plus, z, cutoff).map_err(num)?;
    let pass = rep.residual < tol;
    let summary = json!({
        "status": status(pass),
        "function": match function { Function::Xhat => "xhat", Function::Yhat => "yhat" },
        "sigma_plus": sigma_plus,
        "upper_zeros": upper.to_file(),
        "tolerance": tol,
        "report": rep,
    });
    let mut outputs = Outputs::default();
    outputs.add(o.out.as_ref(), || to_json(&summary));
    Ok(Outcome { summary, pass, outputs })
}

pub fn g_experiment(o: &Options) -> Result<Outcome, CliError> {
    let (v1, v2) = pair(o)?;
    let radius = positive(o.radius.unwrap_or(20.0), "radius")?;
    let r = positive(o.r_window.unwrap_or(0.1), "r-window")?;
    let r_max = positive(o.r_max.unwrap_or(640.0), "r-max")?;
    let tol = o.tolerance.unwrap_or(0.05);
    let rep = g_function_experiment(&v1, &v2, radius, r, r_max, o.ngrid.unwrap_or(1024)).map_err(num)?;
    let pass = rep.degenerate || (rep.width_g - rep.claimed_width_g).abs() <= tol * rep.claimed_width_g;
    let summary = json!({ "status": status(pass), "tolerance": tol, "report": rep });
    let mut outputs = Outputs::default();
    outputs.add(o.out.as_ref(), || to_json(&summary));
    Ok(Outcome { summary, pass, outputs })
}

pub fn distinguish(o: &Options) -> Result<Outcome, CliError> {
    let (v1, v2) = pair(o)?;
    let radius = positive(o.radius.unwrap_or(20.0), "radius")?;
    let rep = uniqueness_report((&v1, &v2), radius).map_err(num)?;
    let summary = json!({ "status": status(rep.pass), "report": rep });
    let mut outputs = Outputs::default();
    outputs.add(o.out.as_ref(), || to_json(&summary));
    Ok(Outcome { summary, pass: rep.pass, outputs })
}

pub fn inverse_recover(o: &Options) -> Result<Outcome, CliError> {
    let path: &PathBuf = required(&o.spec, "spec")?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
    let spec: InverseProblemSpec = serde_json::from_str(&text).map_err(|e| CliError::input(path, e))?;
    spec.validate().map_err(|e| CliError::input(path, e))?;
    let truth = o.truth.as_deref().map(load_potential).transpose()?;
    let init = o.init.clone().unwrap_or_else(|| vec![0.0; spec.n_params]);
    if init.len() != spec.n_params {
        return Err(CliError::Usage(format!("--init has {} values, expected {}", init.len(), spec.n_params)));
    }
    let mut res = recover_left(&spec, &init, o.max_iter.unwrap_or(200)).map_err(num)?;
    if let Some(t) = &truth {
        res = res.with_truth(&spec, t);
    }
    let pass = res.converged;
    let mut outputs = Outputs::default();
    outputs.add(o.out.as_ref(), || to_json(&res));
    outputs.add(o.csv.as_ref(), || res.trace_csv());
    let summary = json!({
        "status": status(pass),
        "converged": res.converged,
        "iterations": res.iterations,
        "final_loss": res.final_loss,
        "recovered_left": res.recovered_left,
        "l2_error_vs_truth": res.l2_error_vs_truth,
    });
    Ok(Outcome { summary, pass, outputs })
}

pub fn random_potential_cmd(o: &Options) -> Result<Outcome, CliError> {
    let seed = *required(&o.seed, "seed")?;
    let max_cells = o.max_cells.unwrap_or(8);
    if max_cells == 0 {
        return Err(CliError::Usage("--max-cells must be at least 1".into()));
    }
    let max_abs = positive(o.max_abs.unwrap_or(5.0), "max-abs")?;
    let half_width = positive(o.half_width.unwrap_or(1.0), "half-width")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_potential(&mut rng, max_cells, max_abs, half_width);
    let mut outputs = Outputs::default();
    outputs.add(o.out.as_ref(), || to_json(&v));
    let summary = json!({ "status": "pass", "seed": seed, "potential": v });
    Ok(Outcome { summary, pass: true, outputs })
}
