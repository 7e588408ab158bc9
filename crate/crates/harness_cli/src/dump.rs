use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use conv_spectral::{block_circulant_eig, filter_weights, kappa_weights, pooling_matrix, spectrum, ConvArchitecture, Pooling};
use inner_kernel::InnerProductKernel;

use crate::HarnessError;

pub fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

/// `omega,j,kappa` rows for every requested width; `j` runs over `0..d`.
pub fn kappa_csv(d: usize, omegas: &[usize]) -> Result<String, HarnessError> {
    let mut s = String::from("omega,j,kappa\n");
    for &w in omegas {
        if w == 0 || w > d {
            return Err(HarnessError::Config(format!("omega={w} must lie in 1..={d}")));
        }
        for (j, k) in kappa_weights(d, w).iter().enumerate() {
            let _ = writeln!(s, "{w},{j},{k}");
        }
    }
    Ok(s)
}

/// Frequency weights of the pooling layer, when it has one.
pub fn frequency_weights(arch: &ConvArchitecture) -> Option<Vec<f64>> {
    match &arch.pooling {
        Pooling::NonOverlapping { .. } => None,
        Pooling::Weighted { filter } => Some(filter_weights(arch.d, filter)),
        _ => Some(kappa_weights(arch.d, arch.omega())),
    }
}

/// `M^r` as a dense CSV and its eigenpairs as `r,lambda,j,index,sin,vector` rows
/// (vector entries separated by spaces).
pub fn pooling_tables(arch: &ConvArchitecture, r: usize) -> Result<(String, String), HarnessError> {
    let m = pooling_matrix(r, arch)?;
    let mut eig = String::from("r,lambda,j,index,sin,vector\n");
    for p in block_circulant_eig(&m)? {
        let v: Vec<String> = p.vector.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(eig, "{r},{},{},{},{},{}", p.lambda, p.j, p.index, p.sin, v.join(" "));
    }
    Ok((m.to_csv(), eig))
}

/// Writes `spectrum.jsonl`, `kappa.csv` (when the pooling has frequency weights) and, for
/// downsampled architectures, `pooling_r{r}.csv` and `pooling_eig_r{r}.csv` for `r` in `1..=q`.
pub fn dump_spectrum(arch: &ConvArchitecture, kernel: &InnerProductKernel, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let spec = spectrum(arch, kernel)?;
    let mut written = Vec::new();
    let path = dir.join("spectrum.jsonl");
    write_file(&path, &spec.to_jsonl())?;
    written.push(path);
    if let Some(w) = frequency_weights(arch) {
        let mut s = String::from("j,kappa\n");
        for (j, k) in w.iter().enumerate() {
            let _ = writeln!(s, "{j},{k}");
        }
        let path = dir.join("kappa.csv");
        write_file(&path, &s)?;
        written.push(path);
    }
    if arch.downsample > 1 && !arch.full_patch() {
        for r in 1..=arch.q {
            let (mat, eig) = pooling_tables(arch, r)?;
            for (name, body) in [(format!("pooling_r{r}.csv"), mat), (format!("pooling_eig_r{r}.csv"), eig)] {
                let path = dir.join(name);
                write_file(&path, &body)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
