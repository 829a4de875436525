//! Human-readable summary of a completed run directory.

use std::fs;
use std::path::Path;

use crate::stages::{read_csv, DeviceFile, BENCHMARK_FILE, DEVICE_FILE, TRACE_FILE};
use crate::CliError;

/// Summarize best Fisher numbers against the SQL/HL reference lines and the
/// estimator's end-of-grid bias/variance with the matching Cramér-Rao值.
pub fn summary(run_dir: &Path) -> Result<String, CliError> {
    let device_path = run_dir.join(DEVICE_FILE);
    if !device_path.exists() {
        return Err(CliError::MissingArtifact(format!(
            "{DEVICE_FILE} not found in {}",
            run_dir.display()
        )));
    }
    let device: DeviceFile = toml::from_str(&fs::read_to_string(&device_path)?)
        .map_err(|e| CliError::Config(format!("{DEVICE_FILE} parse: {e}")))?;

    let n = device.n as f64;
    let mut out = String::new();
    out.push_str(&format!(
        "device: {} n={} d={} gamma={}\n",
        device.ansatz, device.n, device.d, device.gamma
    ));
    out.push_str(&format!("reference: SQL = {} | HL = {}\n", n, n * n));
    if device.ansatz == "graph" {
        out.push_str(&format!(
            "reference: bundled-graph plateau = n^2/2 = {}\n",
            n * n / 2.0
        ));
    }
    out.push_str(&format!(
        "best at phi_eval={:.6}: CFI = {:.6}, QFI = {:.6}\n",
        device.phi_eval, device.best_cfi, device.best_qfi
    ));

    let trace_path = run_dir.join(TRACE_FILE);
    if trace_path.exists() {
        let rows = read_csv(&trace_path)?;
        let iters = rows.len().saturating_sub(1);
        let best_cfi = rows
            .iter()
            .skip(1)
            .filter_map(|r| r.get(1).and_then(|v| v.parse::<f64>().ok()))
            .fold(f64::NEG_INFINITY, f64::max);
        out.push_str(&format!(
            "trace: {iters} iterations, best recorded CFI = {best_cfi:.6}\n"
        ));
    }

    let bench_path = run_dir.join(BENCHMARK_FILE);
    if bench_path.exists() {
        let rows = read_csv(&bench_path)?;
        // Columns: phi_true,m,n_sequences,bias,variance,sq_error
        let parsed: Vec<(f64, usize, f64, f64)> = rows
            .iter()
            .skip(1)
            .filter_map(|r| {
                Some((
                    r.first()?.parse().ok()?,
                    r.get(1)?.parse().ok()?,
                    r.get(3)?.parse().ok()?,
                    r.get(4)?.parse().ok()?,
                ))
            })
            .collect();
        if let Some(max_m) = parsed.iter().map(|r| r.1).max() {
            for (phi_true, m, bias, variance) in parsed.iter().filter(|r| r.1 == max_m) {
                let crb = 1.0 / (*m as f64 * device.best_cfi.max(1e-12));
                out.push_str(&format!(
                    "benchmark at phi={phi_true:.6}, m={m}: bias = {bias:.3e}, \
                     variance = {variance:.3e}, CRB (m*CFI)^-1 = {crb:.3e}\n"
                ));
            }
        }
        out.push_str(&format!(
            "limits at m: SQL (m*n)^-1, HL (m*n^2)^-1 with n = {}\n",
            device.n
        ));
    } else {
        out.push_str("benchmark: not run\n");
    }
    Ok(out)
}
