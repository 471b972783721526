//! Text front ends: words, seeds, quotient specs and finite measures.

use std::sync::Arc;

use gwel::quotients::{parse_quotient_spec, QuotientSpec};
use gwel::{QuotientRep, ReducedWord};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::CliError;

/// Parse letters `a..z` (generators) and `A..Z` (inverses), reducing.
pub fn parse_word(text: &str, rank: u16) -> Result<ReducedWord, CliError> {
    ReducedWord::parse(text, rank).map_err(CliError::from)
}

/// Inverse of [`parse_word`] on reduced words.
pub fn format_word(w: &ReducedWord) -> String {
    w.literal()
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(text: &str) -> Result<u64, String> {
    let t = text.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|e| format!("invalid seed '{text}': {e}"))
}

/// Build a quotient from its textual description.
pub fn build_quotient(text: &str, rank: u16, max_cosets: usize) -> Result<(QuotientSpec, Arc<QuotientRep>), CliError> {
    let spec = parse_quotient_spec(text, rank)?;
    let rep = spec.build(rank, max_cosets)?;
    Ok((spec, Arc::new(rep)))
}

/// A probability as a decimal or `p/q`.
pub fn parse_probability(text: &str) -> Result<f64, CliError> {
    let r = parse_rational(text)?;
    Ok(r.to_f64().unwrap_or(f64::NAN))
}

/// An exact rational in `[0, 1]` written as a decimal (`0.125`) or `p/q`.
pub fn parse_rational(text: &str) -> Result<BigRational, CliError> {
    let t = text.trim();
    let bad = || CliError::Param(format!("invalid probability '{t}'"));
    let int = |s: &str| -> Result<BigInt, CliError> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse().map_err(|_| bad())
    };
    let value = match t.split_once('/') {
        Some((p, q)) => {
            let q = int(q.trim())?;
            if q.is_zero() {
                return Err(bad());
            }
            BigRational::new(int(p.trim())?, q)
        }
        None => match t.split_once('.') {
            Some((whole, frac)) => {
                let digits = format!("{}{frac}", if whole.is_empty() { "0" } else { whole });
                BigRational::new(int(&digits)?, BigInt::from(10u32).pow(frac.len() as u32))
            }
            None => BigRational::from_integer(int(t)?),
        },
    };
    if value > BigRational::one() {
        return Err(bad());
    }
    Ok(value)
}

/// `word:prob` entries separated by commas, masses exact; `1` denotes the
/// identity, e.g. `a:1/4, A:1/4, b:1/4, B:1/4`. Masses must sum to exactly 1.
pub fn parse_measure(text: &str, rank: u16) -> Result<Vec<(ReducedWord, BigRational)>, CliError> {
    let mut entries: Vec<(ReducedWord, BigRational)> = Vec::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (w, p) = item
            .split_once(':')
            .ok_or_else(|| CliError::Param(format!("expected 'word:probability', got '{}'", item.trim())))?;
        let w = w.trim();
        let word = if w == "1" {
            ReducedWord::identity(rank)
        } else {
            parse_word(w, rank)?
        };
        let p = parse_rational(p)?;
        match entries.iter_mut().find(|(v, _)| *v == word) {
            Some((_, q)) => *q += p,
            None => entries.push((word, p)),
        }
    }
    let total: BigRational = entries.iter().map(|(_, p)| p.clone()).sum();
    if !total.is_one() {
        return Err(CliError::Param(format!("measure masses sum to {total}, not 1")));
    }
    entries.retain(|(_, p)| !p.is_zero());
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(entries)
}
