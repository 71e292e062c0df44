//! The anchor–target dictionary: precomputed ranging weights λ and
//! information angles ψ for every candidate-anchor/target pair. The solver
//! works entirely from these tables; geometry and the RF chain are consulted
//! only at build time.
//!
//! Matrices are stored target-major (one contiguous row per target) to keep
//! the per-target summations in the solver inner loop cache-friendly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::channel;
use crate::error::{Error, Result};
use crate::fisher;
use crate::scene::{Scene, Vec3};

const MAGIC: &[u8; 8] = b"ATDICT\0\0";
const VERSION: u32 = 1;

/// Dense (λ, ψ) tables over M candidate anchors and N targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    candidates: Vec<Vec3>,
    targets: Vec<Vec3>,
    /// Target-major: lambda[n * M + m].
    lambda: Vec<f64>,
    /// Target-major: psi[n * M + m].
    psi: Vec<f64>,
    /// Hash of the scene the dictionary was built from.
    scene_hash: [u8; 32],
}

impl Dictionary {
    /// Number of candidate anchors M.
    pub fn m(&self) -> usize {
        self.candidates.len()
    }

    /// Number of targets N.
    pub fn n(&self) -> usize {
        self.targets.len()
    }

    pub fn candidates(&self) -> &[Vec3] {
        &self.candidates
    }

    pub fn targets(&self) -> &[Vec3] {
        &self.targets
    }

    pub fn scene_hash(&self) -> &[u8; 32] {
        &self.scene_hash
    }

    pub fn lambda(&self, m: usize, n: usize) -> f64 {
        self.lambda[n * self.m() + m]
    }

    pub fn psi(&self, m: usize, n: usize) -> f64 {
        self.psi[n * self.m() + m]
    }

    /// Contiguous λ row for one target.
    pub fn lambda_row(&self, n: usize) -> &[f64] {
        let m = self.m();
        &self.lambda[n * m..(n + 1) * m]
    }

    /// Contiguous ψ row for one target.
    pub fn psi_row(&self, n: usize) -> &[f64] {
        let m = self.m();
        &self.psi[n * m..(n + 1) * m]
    }

    /// Assemble a dictionary from raw target-major tables (used by the
    /// solver's synthetic-instance tests as well as the importer).
    pub fn from_parts(
        candidates: Vec<Vec3>,
        targets: Vec<Vec3>,
        lambda: Vec<f64>,
        psi: Vec<f64>,
        scene_hash: [u8; 32],
    ) -> Result<Self> {
        let (m, n) = (candidates.len(), targets.len());
        if m == 0 || n == 0 {
            return Err(Error::validation("dictionary", "candidates and targets must be nonempty"));
        }
        if lambda.len() != m * n || psi.len() != m * n {
            return Err(Error::Format(format!(
                "table sizes {}/{} do not match M*N = {}",
                lambda.len(),
                psi.len(),
                m * n
            )));
        }
        if lambda.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::validation("lambda", "all entries must be finite and > 0"));
        }
        if psi.iter().any(|p| !(*p > 0.0 && *p < std::f64::consts::PI)) {
            return Err(Error::validation("psi", "all entries must lie in (0, π)"));
        }
        Ok(Self { candidates, targets, lambda, psi, scene_hash })
    }
}

/// Build the dictionary for a scene over the given candidate list: λ through
/// the geometry → ν → SNR → weight chain, ψ through the information angle.
/// Deterministic and ordered exactly as the input lists.
pub fn build_dictionary(scene: &Scene, candidates: &[Vec3]) -> Result<Dictionary> {
    if candidates.is_empty() {
        return Err(Error::validation("candidates", "must be nonempty"));
    }
    if scene.targets.is_empty() {
        return Err(Error::validation("targets", "must be nonempty"));
    }
    let (m_count, n_count) = (candidates.len(), scene.targets.len());
    let mut lambda = vec![0.0; m_count * n_count];
    let mut psi = vec![0.0; m_count * n_count];
    for (n, target) in scene.targets.iter().enumerate() {
        for (m, cand) in candidates.iter().enumerate() {
            let entry = (|| -> Result<(f64, f64)> {
                let budget = channel::snr_db(&scene.system, cand, target, scene.ked_mode)?;
                let weight =
                    channel::ranging_weight(budget.snr_linear, scene.system.bandwidth_hz)?;
                let angle = fisher::info_angle(cand, target)?;
                Ok((weight.lambda, angle))
            })()
            .map_err(|e| Error::PairFailure { m, n, source: Box::new(e) })?;
            lambda[n * m_count + m] = entry.0;
            psi[n * m_count + m] = entry.1;
        }
    }
    Dictionary::from_parts(
        candidates.to_vec(),
        scene.targets.clone(),
        lambda,
        psi,
        scene.content_hash(),
    )
}

// ---------------------------------------------------------------------------
// Serialization: versioned binary container and CSV inspection dump
// ---------------------------------------------------------------------------

fn write_f64s(w: &mut impl Write, vals: &[f64]) -> Result<()> {
    for v in vals {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64s(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)
        .map_err(|_| Error::Format("unexpected end of dictionary file".into()))?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn points_to_flat(points: &[Vec3]) -> Vec<f64> {
    points.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
}

fn flat_to_points(flat: &[f64]) -> Vec<Vec3> {
    flat.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect()
}

/// Write the dictionary to its binary container. The float payload is stored
/// bit-exactly, so export → import round-trips losslessly.
pub fn export_dictionary(dict: &Dictionary, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(dict.scene_hash())?;
    w.write_all(&(dict.m() as u64).to_le_bytes())?;
    w.write_all(&(dict.n() as u64).to_le_bytes())?;
    write_f64s(&mut w, &points_to_flat(&dict.candidates))?;
    write_f64s(&mut w, &points_to_flat(&dict.targets))?;
    write_f64s(&mut w, &dict.lambda)?;
    write_f64s(&mut w, &dict.psi)?;
    w.flush()?;
    Ok(())
}

/// Read a dictionary back from its binary container.
pub fn import_dictionary(path: &Path) -> Result<Dictionary> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("file too short for header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic: not a dictionary file".into()));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)
        .map_err(|_| Error::Format("file too short for version".into()))?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(Error::VersionMismatch { found: version, expected: VERSION });
    }
    let mut scene_hash = [0u8; 32];
    r.read_exact(&mut scene_hash)
        .map_err(|_| Error::Format("file too short for scene hash".into()))?;
    let mut qword = [0u8; 8];
    r.read_exact(&mut qword)
        .map_err(|_| Error::Format("file too short for M".into()))?;
    let m = u64::from_le_bytes(qword) as usize;
    r.read_exact(&mut qword)
        .map_err(|_| Error::Format("file too short for N".into()))?;
    let n = u64::from_le_bytes(qword) as usize;
    if m == 0 || n == 0 || m.saturating_mul(n) > (1 << 32) {
        return Err(Error::Format(format!("implausible dimensions M={m}, N={n}")));
    }
    let candidates = flat_to_points(&read_f64s(&mut r, m * 3)?);
    let targets = flat_to_points(&read_f64s(&mut r, n * 3)?);
    let lambda = read_f64s(&mut r, m * n)?;
    let psi = read_f64s(&mut r, m * n)?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after dictionary payload".into()));
    }
    Dictionary::from_parts(candidates, targets, lambda, psi, scene_hash)
}

/// Dump the tables as CSV rows (m, n, lambda, psi_rad) for inspection.
pub fn write_csv(dict: &Dictionary, w: &mut impl Write) -> Result<()> {
    writeln!(w, "m,n,lambda,psi_rad")?;
    for n in 0..dict.n() {
        for m in 0..dict.m() {
            writeln!(w, "{},{},{},{}", m, n, dict.lambda(m, n), dict.psi(m, n))?;
        }
    }
    Ok(())
}
