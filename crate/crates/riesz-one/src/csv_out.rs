//! CSV emitters. Floats use Rust's shortest round-trip formatting, so equal
//! inputs give byte-identical files.

use std::io::Write;

use riesz_one_core::affinity::QSequenceProfile;
use riesz_one_core::diagnostics::{BourgainGap, SpectralReport};
use riesz_one_core::mahler::SzegoSequence;
use riesz_one_core::tower::Autocorrelation;
use riesz_one_core::GridDensity;

use crate::error::AppResult;

fn writer<W: Write>(w: W, header: &[&str]) -> AppResult<csv::Writer<W>> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

/// `theta,value` with theta in turns.
pub fn density_csv<W: Write>(w: W, density: &GridDensity) -> AppResult<()> {
    let mut out = writer(w, &["theta", "value"])?;
    for (i, v) in density.values.iter().enumerate() {
        out.write_record([density.grid.turns(i).to_string(), v.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `n,E_n`.
pub fn szego_csv<W: Write>(w: W, seq: &SzegoSequence) -> AppResult<()> {
    let mut out = writer(w, &["n", "E_n"])?;
    for (n, e) in seq.errors.iter().enumerate() {
        out.write_record([n.to_string(), e.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `K,q_integral,bound`.
pub fn q_sequence_csv<W: Write>(w: W, profile: &QSequenceProfile) -> AppResult<()> {
    let mut out = writer(w, &["K", "q_integral", "bound"])?;
    for (k, q) in profile.ks.iter().zip(&profile.q_integrals) {
        out.write_record([k.to_string(), q.to_string(), profile.mcgehee_bound.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `n,autocorrelation`.
pub fn autocorrelation_csv<W: Write>(w: W, rows: &[Autocorrelation]) -> AppResult<()> {
    let mut out = writer(w, &["n", "autocorrelation"])?;
    for r in rows {
        out.write_record([r.lag.to_string(), r.value.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `n,l1,gap`.
pub fn bourgain_csv<W: Write>(w: W, rows: &[BourgainGap]) -> AppResult<()> {
    let mut out = writer(w, &["n", "l1", "gap"])?;
    for r in rows {
        out.write_record([r.n.to_string(), r.l1.to_string(), r.gap.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Per-section tables of a report: `(file name, writer)` pairs.
pub fn report_tables(report: &SpectralReport) -> AppResult<Vec<(&'static str, Vec<u8>)>> {
    let mut files = Vec::new();

    if let Some(m) = &report.mahler {
        let engines: Vec<_> = m.per_engine.keys().copied().collect();
        let mut header = vec!["K".to_string()];
        header.extend(engines.iter().map(|e| e.to_string()));
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(&header)?;
        let rows = m.per_engine.values().map(|d| d.partials.len()).max().unwrap_or(0);
        for k in 0..rows {
            let mut rec = vec![(k + 1).to_string()];
            for e in &engines {
                rec.push(m.per_engine[e].partials.get(k).map_or(String::new(), |v| v.to_string()));
            }
            out.write_record(&rec)?;
        }
        files.push(("mahler.csv", out.into_inner().map_err(|e| csv::Error::from(e.into_error()))?));
    }
    if let Some(q) = &report.q_profile {
        let mut buf = Vec::new();
        q_sequence_csv(&mut buf, q)?;
        files.push(("q_profile.csv", buf));
    }
    if let Some(kr) = &report.klemes_reinhold {
        let mut out = writer(Vec::new(), &["K", "partial_sum"])?;
        for (k, s) in kr.partial_sums.iter().enumerate() {
            out.write_record([(k + 1).to_string(), s.to_string()])?;
        }
        files.push(("klemes_reinhold.csv", out.into_inner().map_err(|e| csv::Error::from(e.into_error()))?));
    }
    if !report.bourgain.is_empty() {
        let mut buf = Vec::new();
        bourgain_csv(&mut buf, &report.bourgain)?;
        files.push(("bourgain.csv", buf));
    }
    if let Some(m2) = &report.main2 {
        let mut out = writer(Vec::new(), &["K", "product", "sum"])?;
        for (k, (p, s)) in m2.products.iter().zip(&m2.sums).enumerate() {
            out.write_record([(k + 1).to_string(), p.to_string(), s.to_string()])?;
        }
        files.push(("main2.csv", out.into_inner().map_err(|e| csv::Error::from(e.into_error()))?));
    }
    Ok(files)
}
