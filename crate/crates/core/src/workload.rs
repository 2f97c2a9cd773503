//! IRM request streams: Zipf popularity, Poisson arrivals, uniform
//! requesters. Content id `k` has popularity rank `k + 1`.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{substream, Stream};
use crate::topology::{ContentId, NodeId};

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("catalog must contain at least one content")]
    EmptyCatalog,
    #[error("zipf exponent must be finite and non-negative, got {0}")]
    BadExponent(f64),
    #[error("request rate must be positive, got {0}")]
    BadRate(f64),
    #[error("requester set is empty")]
    NoRequesters,
    #[error("trace: {0}")]
    Trace(#[from] csv::Error),
    #[error("trace: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZipfCatalog {
    exponent: f64,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl ZipfCatalog {
    pub fn new(size: usize, exponent: f64) -> Result<Self, WorkloadError> {
        zipf_pmf(size, exponent)
    }

    pub fn size(&self) -> usize {
        self.pmf.len()
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn probability(&self, content: ContentId) -> f64 {
        self.pmf[content]
    }

    /// Inverse-CDF draw from a uniform `u` in `[0, 1)`.
    pub fn sample_with(&self, u: f64) -> ContentId {
        self.cdf.partition_point(|&c| c <= u).min(self.pmf.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ContentId {
        self.sample_with(rng.random::<f64>())
    }
}

/// `q(k) = (k+1)^-exponent / H`.
pub fn zipf_pmf(size: usize, exponent: f64) -> Result<ZipfCatalog, WorkloadError> {
    if size == 0 {
        return Err(WorkloadError::EmptyCatalog);
    }
    if !(exponent >= 0.0) || !exponent.is_finite() {
        return Err(WorkloadError::BadExponent(exponent));
    }
    let weights: Vec<f64> = (1..=size).map(|k| (k as f64).powf(-exponent)).collect();
    // smallest terms first
    let h: f64 = weights.iter().rev().sum();
    let pmf: Vec<f64> = weights.iter().map(|w| w / h).collect();
    let mut cdf = Vec::with_capacity(size);
    let mut acc = 0.0;
    for p in &pmf {
        acc += p;
        cdf.push(acc);
    }
    Ok(ZipfCatalog { exponent, pmf, cdf })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Request {
    #[serde(rename = "seq")]
    pub sequence: u64,
    pub timestamp: f64,
    pub requester: NodeId,
    pub content: ContentId,
}

/// Iterator over a reproducible request stream.
pub struct RequestStream<'a> {
    catalog: &'a ZipfCatalog,
    requesters: &'a [NodeId],
    inter_arrival: Exp<f64>,
    arrivals: ChaCha8Rng,
    contents: ChaCha8Rng,
    picks: ChaCha8Rng,
    clock: f64,
    next_seq: u64,
    remaining: u64,
}

impl Iterator for RequestStream<'_> {
    type Item = Request;

    fn next(&mut self) -> Option<Request> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        self.clock += self.inter_arrival.sample(&mut self.arrivals);
        let content = self.catalog.sample(&mut self.contents);
        let requester = self.requesters[self.picks.random_range(0..self.requesters.len())];
        let req = Request { sequence: self.next_seq, timestamp: self.clock, requester, content };
        self.next_seq += 1;
        Some(req)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining as usize, Some(self.remaining as usize))
    }
}

pub fn generate<'a>(
    catalog: &'a ZipfCatalog,
    requesters: &'a [NodeId],
    total_rate: f64,
    count: u64,
    seed: u64,
) -> Result<RequestStream<'a>, WorkloadError> {
    if !(total_rate > 0.0) || !total_rate.is_finite() {
        return Err(WorkloadError::BadRate(total_rate));
    }
    if requesters.is_empty() {
        return Err(WorkloadError::NoRequesters);
    }
    Ok(RequestStream {
        catalog,
        requesters,
        inter_arrival: Exp::new(total_rate).map_err(|_| WorkloadError::BadRate(total_rate))?,
        arrivals: substream(seed, Stream::Arrivals),
        contents: substream(seed, Stream::Contents),
        picks: substream(seed, Stream::Requesters),
        clock: 0.0,
        next_seq: 0,
        remaining: count,
    })
}

/// Writes `seq,timestamp,requester,content` rows with a header.
pub fn write_trace<W: Write, I: IntoIterator<Item = Request>>(out: W, requests: I) -> Result<(), WorkloadError> {
    let mut w = csv::Writer::from_writer(out);
    for r in requests {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<Request>, WorkloadError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}
