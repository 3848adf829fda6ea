use serde::Serialize;

use crate::correlations::{BoundReport, Direction};

/// Tolerance for comparisons between exactly evaluated quantities.
pub const EXACT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs <= rhs`
    Le,
    /// `lhs == rhs`
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// The directions entail the relation and the values satisfy it.
    Certified,
    /// The values satisfy the relation up to the optimizer error estimates,
    /// but the directions do not entail it.
    Supported,
    /// The directions entail that the relation is violated.
    Refuted,
    /// Neither of the above.
    Inconclusive,
}

/// Outcome of checking one relation between two reported quantities.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationRecord {
    pub name: String,
    pub relation: Relation,
    pub lhs: BoundReport,
    pub rhs: BoundReport,
    pub tolerance: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    /// The directions of the two sides are able to certify the relation.
    pub sound: bool,
    pub pass: bool,
    pub status: Status,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

fn can_bound_from_above(d: Direction) -> bool {
    matches!(d, Direction::Exact | Direction::Upper)
}

fn can_bound_from_below(d: Direction) -> bool {
    matches!(d, Direction::Exact | Direction::Lower)
}

impl VerificationRecord {
    /// `lhs <= rhs` within `tol`. Certification needs the true lhs to be at
    /// most its reported value and the true rhs at least its reported value.
    pub fn le(name: &str, lhs: BoundReport, rhs: BoundReport, tol: f64) -> Self {
        let slack = rhs.value - lhs.value;
        let sound = can_bound_from_above(lhs.direction) && can_bound_from_below(rhs.direction);
        let refutable = can_bound_from_below(lhs.direction) && can_bound_from_above(rhs.direction);
        let margin = tol + lhs.error_estimate + rhs.error_estimate;
        let pass = sound && slack >= -tol;
        let status = if pass {
            Status::Certified
        } else if refutable && slack < -tol {
            Status::Refuted
        } else if !sound && slack >= -margin {
            Status::Supported
        } else {
            Status::Inconclusive
        };
        Self {
            name: name.to_string(),
            relation: Relation::Le,
            lhs,
            rhs,
            tolerance: tol,
            slack,
            sound,
            pass,
            status,
            note: String::new(),
        }
    }

    /// `|lhs - rhs| <= tol`; certifiable only between exact values.
    pub fn eq(name: &str, lhs: BoundReport, rhs: BoundReport, tol: f64) -> Self {
        let slack = rhs.value - lhs.value;
        let sound = lhs.is_exact() && rhs.is_exact();
        let margin = tol + lhs.error_estimate + rhs.error_estimate;
        let pass = sound && slack.abs() <= tol;
        let status = if pass {
            Status::Certified
        } else if sound {
            Status::Refuted
        } else if slack.abs() <= margin {
            Status::Supported
        } else {
            Status::Inconclusive
        };
        Self {
            name: name.to_string(),
            relation: Relation::Eq,
            lhs,
            rhs,
            tolerance: tol,
            slack,
            sound,
            pass,
            status,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Certified, or numerically supported where certification is out of reach.
    pub fn ok(&self) -> bool {
        self.pass || self.status == Status::Supported
    }

    pub fn certificate_kind(&self) -> String {
        format!("{}/{}", self.lhs.certificate_kind(), self.rhs.certificate_kind())
    }

    pub fn row(&self) -> RecordRow {
        RecordRow {
            name: self.name.clone(),
            lhs_value: sig12(self.lhs.value),
            lhs_direction: self.lhs.direction,
            rhs_value: sig12(self.rhs.value),
            rhs_direction: self.rhs.direction,
            slack: sig12(self.slack),
            sound: self.sound,
            pass: self.pass,
            certificate_kind: self.certificate_kind(),
            status: self.status,
            relation: self.relation,
            tolerance: sig12(self.tolerance),
            note: self.note.clone(),
        }
    }
}

/// Flat form of a record: one JSON line or one CSV row.
#[derive(Debug, Clone, Serialize)]
pub struct RecordRow {
    pub name: String,
    pub lhs_value: f64,
    pub lhs_direction: Direction,
    pub rhs_value: f64,
    pub rhs_direction: Direction,
    pub slack: f64,
    pub sound: bool,
    pub pass: bool,
    pub certificate_kind: String,
    pub status: Status,
    pub relation: Relation,
    pub tolerance: f64,
    pub note: String,
}

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(v: f64) -> BoundReport {
        BoundReport::exact(v, "test", None)
    }

    fn upper(v: f64, err: f64) -> BoundReport {
        BoundReport::upper(v, "test", err, None)
    }

    fn lower(v: f64) -> BoundReport {
        BoundReport::lower(v, "test", None)
    }

    #[test]
    fn direction_algebra() {
        let r = VerificationRecord::le("x", exact(0.2), exact(0.3), 1e-8);
        assert!(r.sound && r.pass && r.status == Status::Certified);
        // an upper bound on the smaller side is enough
        let r = VerificationRecord::le("x", upper(0.2, 0.0), exact(0.3), 1e-8);
        assert!(r.sound && r.pass);
        // an upper bound on the larger side is not
        let r = VerificationRecord::le("x", exact(0.2), upper(0.3, 0.0), 1e-8);
        assert!(!r.sound && !r.pass && r.status == Status::Supported && r.ok());
        let r = VerificationRecord::le("x", lower(0.2), exact(0.3), 1e-8);
        assert!(!r.sound && r.status == Status::Supported);
        let r = VerificationRecord::le("x", lower(0.5), exact(0.3), 1e-8);
        assert_eq!(r.status, Status::Refuted);
        let r = VerificationRecord::le("x", upper(0.5, 0.0), exact(0.3), 1e-8);
        assert!(r.sound && !r.pass && r.status == Status::Inconclusive && !r.ok());
        // optimizer error estimates widen the supported band only
        let r = VerificationRecord::le("x", upper(0.3, 0.02), upper(0.29, 0.0), 1e-8);
        assert_eq!(r.status, Status::Supported);
        let r = VerificationRecord::le("x", upper(0.3, 0.0), upper(0.29, 0.0), 1e-8);
        assert_eq!(r.status, Status::Inconclusive);
        // an upper bound below an exact value refutes whatever the error estimate
        let r = VerificationRecord::le("x", exact(0.3), upper(0.29, 0.02), 1e-8);
        assert_eq!(r.status, Status::Refuted);
    }

    #[test]
    fn equalities_need_exact_sides() {
        let r = VerificationRecord::eq("x", exact(1.0), exact(1.0 + 1e-10), 1e-8);
        assert!(r.pass);
        let r = VerificationRecord::eq("x", exact(1.0), exact(1.1), 1e-8);
        assert_eq!(r.status, Status::Refuted);
        let r = VerificationRecord::eq("x", exact(1.0), upper(1.0, 0.0), 1e-8);
        assert!(!r.pass && r.status == Status::Supported);
    }

    #[test]
    fn rounding() {
        assert_eq!(sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(sig12(0.0), 0.0);
        assert_eq!(sig12(-2.0 / 3.0 * 1e-7), -6.66666666667e-8);
        let row = VerificationRecord::le("x", exact(1.0 / 3.0), exact(1.0), 1e-8).row();
        let json = serde_json::to_string(&row).unwrap();
        assert!(json.contains("\"lhs_value\":0.333333333333"));
        assert!(json.contains("\"lhs_direction\":\"exact\""));
    }
}
