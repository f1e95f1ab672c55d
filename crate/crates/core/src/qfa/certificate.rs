use std::fmt;

use crate::error::{Error, Result};

/// Slack used when checking certificate self-consistency.
const CERT_SLACK: f64 = 1e-12;

/// Which side, if any, is decided without error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sidedness {
    /// Non-members are accepted with probability 0.
    Positive,
    /// Members are accepted with probability 1.
    Negative,
    TwoSided,
}

impl Sidedness {
    pub fn flipped(self) -> Self {
        match self {
            Sidedness::Positive => Sidedness::Negative,
            Sidedness::Negative => Sidedness::Positive,
            Sidedness::TwoSided => Sidedness::TwoSided,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sidedness::Positive => "positive",
            Sidedness::Negative => "negative",
            Sidedness::TwoSided => "none",
        }
    }
}

/// A closed interval of probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64) -> Self {
        Bounds { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Bounds { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lo - slack && x <= self.hi + slack
    }

    pub fn hull(&self, other: &Bounds) -> Bounds {
        Bounds::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Product of two intervals of nonnegative numbers.
    pub fn mul(&self, other: &Bounds) -> Bounds {
        Bounds::new(self.lo * other.lo, self.hi * other.hi)
    }

    pub fn powi(&self, k: u32) -> Bounds {
        Bounds::new(self.lo.powi(k as i32), self.hi.powi(k as i32))
    }

    pub fn scale(&self, factor: f64) -> Bounds {
        Bounds::new(self.lo * factor, self.hi * factor)
    }

    pub fn clamp_unit(&self) -> Bounds {
        Bounds::new(self.lo.clamp(0.0, 1.0), self.hi.clamp(0.0, 1.0))
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Cut-point, margin, and maximum margin of an MM-QFA, plus structural flags.
///
/// Members have acceptance probability in `[λ+ε, min(1, λ+η)]`; non-members
/// in `[max(0, λ−η), λ−ε]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcceptanceCertificate {
    pub cut_point: f64,
    pub margin: f64,
    pub max_margin: f64,
    pub end_decisive: bool,
    pub co_end_decisive: bool,
    pub sidedness: Sidedness,
    pub positive_amplitude: bool,
}

/// Structural flags carried alongside an envelope.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CertificateFlags {
    pub end_decisive: bool,
    pub co_end_decisive: bool,
    pub positive_amplitude: bool,
}

impl AcceptanceCertificate {
    pub fn member_bounds(&self) -> Bounds {
        Bounds::new(
            self.cut_point + self.margin,
            (self.cut_point + self.max_margin).min(1.0),
        )
    }

    pub fn non_member_bounds(&self) -> Bounds {
        Bounds::new(
            (self.cut_point - self.max_margin).max(0.0),
            self.cut_point - self.margin,
        )
    }

    /// Builds the certificate whose envelopes are the given member and
    /// non-member intervals. The intervals must be separated.
    pub fn from_envelope(
        member: Bounds,
        non_member: Bounds,
        flags: CertificateFlags,
    ) -> Result<Self> {
        let member = member.clamp_unit();
        let non_member = non_member.clamp_unit();
        if !(member.lo > non_member.hi) {
            return Err(Error::Precondition(format!(
                "member envelope {member} does not lie above non-member envelope {non_member}"
            )));
        }
        let cut_point = (non_member.hi + member.lo) / 2.0;
        let margin = (member.lo - non_member.hi) / 2.0;
        let max_margin = (member.hi - cut_point).max(cut_point - non_member.lo).max(margin);
        let sidedness = if non_member.hi == 0.0 {
            Sidedness::Positive
        } else if member.lo == 1.0 {
            Sidedness::Negative
        } else {
            Sidedness::TwoSided
        };
        Ok(AcceptanceCertificate {
            cut_point,
            margin,
            max_margin,
            end_decisive: flags.end_decisive,
            co_end_decisive: flags.co_end_decisive,
            sidedness,
            positive_amplitude: flags.positive_amplitude,
        })
    }

    pub fn flags(&self) -> CertificateFlags {
        CertificateFlags {
            end_decisive: self.end_decisive,
            co_end_decisive: self.co_end_decisive,
            positive_amplitude: self.positive_amplitude,
        }
    }

    /// The certificate after exchanging accepting and rejecting labels.
    pub fn complemented(&self) -> Self {
        AcceptanceCertificate {
            cut_point: 1.0 - self.cut_point,
            margin: self.margin,
            max_margin: self.max_margin,
            end_decisive: self.co_end_decisive,
            co_end_decisive: self.end_decisive,
            sidedness: self.sidedness.flipped(),
            positive_amplitude: false,
        }
    }

    pub fn is_bounded_error(&self) -> bool {
        self.margin > 0.0
    }

    /// Self-consistency problems, empty when the certificate is well formed.
    pub fn problems(&self) -> Vec<String> {
        let (l, e, h) = (self.cut_point, self.margin, self.max_margin);
        let mut out = Vec::new();
        if !(l.is_finite() && e.is_finite() && h.is_finite()) {
            out.push("certificate has a non-finite field".to_string());
            return out;
        }
        if !(0.0..=1.0).contains(&l) {
            out.push(format!("cut-point {l} outside [0, 1]"));
        }
        if e < 0.0 {
            out.push(format!("margin {e} is negative"));
        }
        if e > h {
            out.push(format!("margin {e} exceeds maximum margin {h}"));
        }
        if l + e > 1.0 + CERT_SLACK {
            out.push(format!("member lower bound {} exceeds 1", l + e));
        }
        if l - e < -CERT_SLACK {
            out.push(format!("non-member upper bound {} is negative", l - e));
        }
        match self.sidedness {
            Sidedness::Positive if (l - e).abs() > CERT_SLACK => out.push(format!(
                "positive one-sided certificate needs cut-point = margin, got {l} and {e}"
            )),
            Sidedness::Negative if (l + e - 1.0).abs() > CERT_SLACK => out.push(format!(
                "negative one-sided certificate needs cut-point + margin = 1, got {}",
                l + e
            )),
            _ => {}
        }
        out
    }
}

impl fmt::Display for AcceptanceCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cut-point {} margin {} max-margin {} end-decisive {} co-end-decisive {} one-sided {} positive-amplitude {}",
            self.cut_point,
            self.margin,
            self.max_margin,
            self.end_decisive,
            self.co_end_decisive,
            self.sidedness.name(),
            self.positive_amplitude
        )
    }
}
