//! The operator/node market: problem data and the utility quantities both
//! sides care about.
//!
//! A [`MarketInstance`] bundles the operation-cost matrix `C`, the QoS
//! measurement-noise covariance `Σ`, the operator's marginal product `β`, the
//! node's absolute risk aversion `η`, and the node's reservation value `w̄`.
//! A [`Contract`] is a linear payment plan `w = t + sᵀq` over the observed
//! QoS vector `q`, and an [`EffortVector`] is the node's actual (hidden)
//! resource contribution.

use crate::error::{Error, Result};
use crate::matrix::{SymMatrix, TOL_PSD};

/// Exponent magnitude beyond which the CARA utility is treated as overflowed
/// rather than silently returning infinity.
pub const UTILITY_EXPONENT_CAP: f64 = 700.0;

/// Resource quantities contributed by the node, one entry per resource type,
/// normalized to a common inverse-latency unit.
#[derive(Debug, Clone, PartialEq)]
pub struct EffortVector(pub Vec<f64>);

impl EffortVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Linear payment plan: fixed salary `t` plus QoS-linked rates `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    pub t: f64,
    pub s: Vec<f64>,
}

impl Contract {
    pub fn new(t: f64, s: Vec<f64>) -> Self {
        Self { t, s }
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }
}

/// Full problem data for one operator/node market.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketInstance {
    n: usize,
    c: SymMatrix,
    sigma: SymMatrix,
    beta: Vec<f64>,
    eta: f64,
    w_bar: f64,
    allow_complementarity: bool,
}

impl MarketInstance {
    /// Validates and builds an instance. `C` must be symmetric positive
    /// definite with nonnegative entries (cost couplings are substitutes or
    /// independent), `Σ` symmetric positive semi-definite with nonnegative
    /// diagonal, and `η > 0`.
    pub fn new(c: SymMatrix, sigma: SymMatrix, beta: Vec<f64>, eta: f64, w_bar: f64) -> Result<Self> {
        Self::with_options(c, sigma, beta, eta, w_bar, false)
    }

    /// Like [`MarketInstance::new`] but permits negative cost couplings
    /// (technologically complementary resources); positive definiteness of
    /// `C` is still enforced.
    pub fn with_complementarity(
        c: SymMatrix,
        sigma: SymMatrix,
        beta: Vec<f64>,
        eta: f64,
        w_bar: f64,
    ) -> Result<Self> {
        Self::with_options(c, sigma, beta, eta, w_bar, true)
    }

    fn with_options(
        c: SymMatrix,
        sigma: SymMatrix,
        beta: Vec<f64>,
        eta: f64,
        w_bar: f64,
        allow_complementarity: bool,
    ) -> Result<Self> {
        let n = c.n();
        if sigma.n() != n {
            return Err(Error::InvalidInstance(format!(
                "noise covariance is {}x{} but cost matrix is {n}x{n}",
                sigma.n(),
                sigma.n()
            )));
        }
        if beta.len() != n {
            return Err(Error::InvalidInstance(format!(
                "beta has length {} but cost matrix is {n}x{n}",
                beta.len()
            )));
        }
        if !allow_complementarity && c.data().iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInstance(
                "cost matrix has a negative entry (technological complementarity not allowed)"
                    .into(),
            ));
        }
        if !c.is_pd() {
            return Err(Error::InvalidInstance(
                "cost matrix must be positive definite".into(),
            ));
        }
        if sigma.diagonal().iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInstance(
                "noise covariance has a negative diagonal entry".into(),
            ));
        }
        if !sigma.is_psd(TOL_PSD) {
            return Err(Error::InvalidInstance(
                "noise covariance must be positive semi-definite".into(),
            ));
        }
        if eta <= 0.0 || !eta.is_finite() {
            return Err(Error::InvalidInstance(
                "risk aversion eta must be positive and finite".into(),
            ));
        }
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance("beta entry is not finite".into()));
        }
        if !w_bar.is_finite() {
            return Err(Error::InvalidInstance(
                "reservation value must be finite".into(),
            ));
        }
        Ok(Self {
            n,
            c,
            sigma,
            beta,
            eta,
            w_bar,
            allow_complementarity,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cost_matrix(&self) -> &SymMatrix {
        &self.c
    }

    pub fn noise_cov(&self) -> &SymMatrix {
        &self.sigma
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn w_bar(&self) -> f64 {
        self.w_bar
    }

    pub fn allows_complementarity(&self) -> bool {
        self.allow_complementarity
    }

    /// FNV-1a hash of the numeric content; ties reports to the instance they
    /// were solved on.
    pub fn digest(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(&(self.n as u64).to_le_bytes());
        for v in self.c.data() {
            eat(&v.to_bits().to_le_bytes());
        }
        for v in self.sigma.data() {
            eat(&v.to_bits().to_le_bytes());
        }
        for v in &self.beta {
            eat(&v.to_bits().to_le_bytes());
        }
        eat(&self.eta.to_bits().to_le_bytes());
        eat(&self.w_bar.to_bits().to_le_bytes());
        h
    }

    /// Copy with the cost couplings removed (off-diagonal of `C` zeroed).
    /// Always valid: the diagonal of a positive definite matrix is positive.
    pub fn with_diagonal_cost(&self) -> Self {
        Self {
            c: self.c.diagonal_part(),
            ..self.clone()
        }
    }

    /// Copy with the noise correlations removed (off-diagonal of `Σ` zeroed).
    pub fn with_diagonal_noise(&self) -> Self {
        Self {
            sigma: self.sigma.diagonal_part(),
            ..self.clone()
        }
    }

    /// Copy with cost entry (i, j) (and its mirror) replaced; revalidates.
    pub fn with_cost_entry(&self, i: usize, j: usize, value: f64) -> Result<Self> {
        Self::with_options(
            self.c.with_entry(i, j, value)?,
            self.sigma.clone(),
            self.beta.clone(),
            self.eta,
            self.w_bar,
            self.allow_complementarity,
        )
    }

    /// Copy with noise entry (i, j) (and its mirror) replaced; revalidates.
    pub fn with_noise_entry(&self, i: usize, j: usize, value: f64) -> Result<Self> {
        Self::with_options(
            self.c.clone(),
            self.sigma.with_entry(i, j, value)?,
            self.beta.clone(),
            self.eta,
            self.w_bar,
            self.allow_complementarity,
        )
    }

    pub fn with_beta_entry(&self, i: usize, value: f64) -> Result<Self> {
        if i >= self.n {
            return Err(Error::BadDimension { dim: i, n: self.n });
        }
        let mut beta = self.beta.clone();
        beta[i] = value;
        Self::with_options(
            self.c.clone(),
            self.sigma.clone(),
            beta,
            self.eta,
            self.w_bar,
            self.allow_complementarity,
        )
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::with_options(
            self.c.clone(),
            self.sigma.clone(),
            self.beta.clone(),
            eta,
            self.w_bar,
            self.allow_complementarity,
        )
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: len,
            });
        }
        Ok(())
    }

    /// Quadratic operation cost ψ(a) = ½ aᵀ C a.
    pub fn operation_cost(&self, a: &EffortVector) -> Result<f64> {
        self.check_dim(a.len())?;
        Ok(0.5 * self.c.quadratic_form(a.as_slice()))
    }

    /// Node certainty equivalent CE_u = t + sᵀa − ½aᵀCa − ½η sᵀΣs.
    pub fn fn_certainty_equivalent(&self, contract: &Contract, a: &EffortVector) -> Result<f64> {
        self.check_dim(contract.dim())?;
        self.check_dim(a.len())?;
        let expected_bonus = crate::matrix::dot(&contract.s, a.as_slice());
        let risk_premium = 0.5 * self.eta * self.sigma.quadratic_form(&contract.s);
        Ok(contract.t + expected_bonus - self.operation_cost(a)? - risk_premium)
    }

    /// CARA utility −e^{−η(w − ψ(a))} of a realized income `w_realized`.
    /// Errors with [`Error::Overflow`] when the exponent exceeds the cap,
    /// which signals degenerate parameters.
    pub fn fn_exponential_utility(&self, w_realized: f64, a: &EffortVector) -> Result<f64> {
        self.check_dim(a.len())?;
        let exponent = -self.eta * (w_realized - self.operation_cost(a)?);
        if exponent > UTILITY_EXPONENT_CAP {
            return Err(Error::Overflow(exponent));
        }
        Ok(-exponent.exp())
    }

    /// Operator certainty equivalent CE_p = βᵀa − sᵀa − t (risk neutral).
    pub fn no_certainty_equivalent(&self, contract: &Contract, a: &EffortVector) -> Result<f64> {
        self.check_dim(contract.dim())?;
        self.check_dim(a.len())?;
        Ok(crate::matrix::dot(&self.beta, a.as_slice())
            - crate::matrix::dot(&contract.s, a.as_slice())
            - contract.t)
    }

    /// Joint surplus R = βᵀa − ½aᵀCa − ½η sᵀΣs; the fixed salary cancels.
    pub fn social_welfare(&self, contract: &Contract, a: &EffortVector) -> Result<f64> {
        self.check_dim(contract.dim())?;
        self.check_dim(a.len())?;
        let risk_premium = 0.5 * self.eta * self.sigma.quadratic_form(&contract.s);
        Ok(crate::matrix::dot(&self.beta, a.as_slice()) - self.operation_cost(a)? - risk_premium)
    }

    /// The node's rational effort choice under a linear contract: a = C⁻¹ s.
    pub fn fn_best_response(&self, contract: &Contract) -> Result<EffortVector> {
        self.check_dim(contract.dim())?;
        let c_inv = self.c.invert()?;
        Ok(EffortVector(c_inv.mul_vec(&contract.s)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SymMatrix;

    fn inst(c: SymMatrix, sigma: SymMatrix, beta: Vec<f64>, eta: f64, w_bar: f64) -> MarketInstance {
        MarketInstance::new(c, sigma, beta, eta, w_bar).unwrap()
    }

    fn coupled(n: usize, diag: f64, off: f64) -> SymMatrix {
        let mut rows = vec![vec![off; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = diag;
        }
        SymMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn operation_cost_identity() {
        let m = inst(
            SymMatrix::identity(2),
            SymMatrix::identity(2),
            vec![1.0, 1.0],
            1.0,
            0.0,
        );
        let cost = m.operation_cost(&EffortVector(vec![1.0, 1.0])).unwrap();
        assert_eq!(cost, 1.0);
    }

    #[test]
    fn operation_cost_zero_effort() {
        let m = inst(
            coupled(2, 2.0, 1.0),
            SymMatrix::identity(2),
            vec![1.0, 1.0],
            1.0,
            0.0,
        );
        assert_eq!(m.operation_cost(&EffortVector::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn operation_cost_coupled() {
        let m = inst(
            coupled(2, 2.0, 1.0),
            SymMatrix::identity(2),
            vec![1.0, 1.0],
            1.0,
            0.0,
        );
        let cost = m.operation_cost(&EffortVector(vec![1.0, 1.0])).unwrap();
        assert!((cost - 3.0).abs() < 1e-15);
    }

    #[test]
    fn certainty_equivalent_salary_only() {
        let m = inst(
            SymMatrix::identity(1),
            SymMatrix::identity(1),
            vec![1.0],
            1.0,
            0.0,
        );
        let ce = m
            .fn_certainty_equivalent(&Contract::new(1.0, vec![0.0]), &EffortVector::zeros(1))
            .unwrap();
        assert_eq!(ce, 1.0);
    }

    #[test]
    fn certainty_equivalent_unit_case() {
        let m = inst(
            SymMatrix::identity(1),
            SymMatrix::identity(1),
            vec![1.0],
            1.0,
            0.0,
        );
        let ce = m
            .fn_certainty_equivalent(&Contract::new(0.0, vec![1.0]), &EffortVector(vec![1.0]))
            .unwrap();
        assert!(ce.abs() < 1e-15);
    }

    #[test]
    fn certainty_equivalent_reservation_config() {
        let w_bar = 0.7;
        let m = inst(
            SymMatrix::identity(1),
            SymMatrix::identity(1),
            vec![1.0],
            1.0,
            w_bar,
        );
        let ce = m
            .fn_certainty_equivalent(&Contract::new(w_bar, vec![0.0]), &EffortVector::zeros(1))
            .unwrap();
        assert_eq!(ce, w_bar);
    }

    #[test]
    fn exponential_utility_reservation() {
        let m = inst(
            SymMatrix::identity(1),
            SymMatrix::identity(1),
            vec![1.0],
            1.0,
            0.0,
        );
        let u = m
            .fn_exponential_utility(0.0, &EffortVector::zeros(1))
            .unwrap();
        assert_eq!(u, -1.0);
    }

    #[test]
    fn exponential_utility_half() {
        let m = inst(
            SymMatrix::identity(1),
            SymMatrix::identity(1),
            vec![1.0],
            1.0,
            0.0,
        );
        let a = EffortVector(vec![0.5]);
        let cost = m.operation_cost(&a).unwrap();
        let u = m
            .fn_exponential_utility(2f64.ln() + cost, &a)
            .unwrap();
        assert!((u + 0.5).abs() < 1e-15);
    }

    #[test]
    fn exponential_utility_zero_net_income() {
        let m = inst(
            SymMatrix::identity(1),
            SymMatrix::identity(1),
            vec![1.0],
            2.0,
            0.0,
        );
        let a = EffortVector(vec![1.0]);
        let cost = m.operation_cost(&a).unwrap();
        let u = m.fn_exponential_utility(cost, &a).unwrap();
        assert_eq!(u, -1.0);
    }

    #[test]
    fn exponential_utility_overflow() {
        let m = inst(
            SymMatrix::identity(1),
            SymMatrix::identity(1),
            vec![1.0],
            1.0,
            0.0,
        );
        let err = m
            .fn_exponential_utility(-800.0, &EffortVector::zeros(1))
            .unwrap_err();
        assert!(matches!(err, Error::Overflow(_)));
    }

    #[test]
    fn operator_ce_cases() {
        let m = inst(
            SymMatrix::identity(2),
            SymMatrix::identity(2),
            vec![1.0, 1.0],
            1.0,
            0.0,
        );
        let ce = m
            .no_certainty_equivalent(
                &Contract::new(0.0, vec![0.0, 0.0]),
                &EffortVector(vec![1.0, 1.0]),
            )
            .unwrap();
        assert_eq!(ce, 2.0);

        let ce = m
            .no_certainty_equivalent(
                &Contract::new(0.0, vec![1.0, 1.0]),
                &EffortVector(vec![0.3, 0.9]),
            )
            .unwrap();
        assert_eq!(ce, 0.0);

        let m1 = inst(
            SymMatrix::identity(1),
            SymMatrix::identity(1),
            vec![1.0],
            1.0,
            0.0,
        );
        let ce = m1
            .no_certainty_equivalent(&Contract::new(0.1, vec![0.5]), &EffortVector(vec![0.5]))
            .unwrap();
        assert!((ce - 0.15).abs() < 1e-15);
    }

    #[test]
    fn social_welfare_cases() {
        let m = inst(
            SymMatrix::identity(2),
            SymMatrix::identity(2),
            vec![1.0, 1.0],
            1.0,
            0.0,
        );
        let zero = m
            .social_welfare(&Contract::new(0.3, vec![0.0, 0.0]), &EffortVector::zeros(2))
            .unwrap();
        assert_eq!(zero, 0.0);

        let k = Contract::new(0.0, vec![0.5, 0.5]);
        let a = EffortVector(vec![0.5, 0.5]);
        let r = m.social_welfare(&k, &a).unwrap();
        assert!((r - 0.5).abs() < 1e-15);

        let ce_u = m.fn_certainty_equivalent(&k, &a).unwrap();
        let ce_p = m.no_certainty_equivalent(&k, &a).unwrap();
        assert!((r - (ce_u + ce_p)).abs() < 1e-12);
    }

    #[test]
    fn best_response_scaling() {
        let m = inst(
            SymMatrix::from_diagonal(&[2.0, 2.0]),
            SymMatrix::identity(2),
            vec![1.0, 1.0],
            1.0,
            0.0,
        );
        let a = m.fn_best_response(&Contract::new(0.0, vec![1.0, 1.0])).unwrap();
        assert!((a.0[0] - 0.5).abs() < 1e-14);
        assert!((a.0[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn best_response_zero_incentive() {
        let m = inst(
            coupled(2, 2.0, 1.0),
            SymMatrix::identity(2),
            vec![1.0, 1.0],
            1.0,
            0.0,
        );
        let a = m.fn_best_response(&Contract::new(5.0, vec![0.0, 0.0])).unwrap();
        assert_eq!(a.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn best_response_coupled() {
        let m = inst(
            coupled(2, 2.0, 1.0),
            SymMatrix::identity(2),
            vec![1.0, 1.0],
            1.0,
            0.0,
        );
        let a = m.fn_best_response(&Contract::new(0.0, vec![1.0, 1.0])).unwrap();
        assert!((a.0[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((a.0[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_cost_entry_by_default() {
        let c = SymMatrix::from_rows(&[vec![1.0, -0.2], vec![-0.2, 1.0]]).unwrap();
        let err = MarketInstance::new(
            c.clone(),
            SymMatrix::identity(2),
            vec![1.0, 1.0],
            1.0,
            0.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInstance(_)));

        MarketInstance::with_complementarity(c, SymMatrix::identity(2), vec![1.0, 1.0], 1.0, 0.0)
            .unwrap();
    }

    #[test]
    fn rejects_semidefinite_cost() {
        let c = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let err =
            MarketInstance::new(c, SymMatrix::identity(2), vec![1.0, 1.0], 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::InvalidInstance(_)));
    }

    #[test]
    fn accepts_zero_noise() {
        MarketInstance::new(
            SymMatrix::identity(2),
            SymMatrix::zeros(2),
            vec![1.0, 1.0],
            1.0,
            0.0,
        )
        .unwrap();
    }

    #[test]
    fn rejects_nonpositive_eta() {
        let err = MarketInstance::new(
            SymMatrix::identity(1),
            SymMatrix::identity(1),
            vec![1.0],
            0.0,
            0.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInstance(_)));
    }

    #[test]
    fn digest_changes_with_content() {
        let a = inst(
            SymMatrix::identity(2),
            SymMatrix::identity(2),
            vec![1.0, 1.0],
            1.0,
            0.0,
        );
        let b = a.with_eta(2.0).unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), a.clone().digest());
    }

    #[test]
    fn dimension_mismatch_reported() {
        let m = inst(
            SymMatrix::identity(2),
            SymMatrix::identity(2),
            vec![1.0, 1.0],
            1.0,
            0.0,
        );
        let err = m.operation_cost(&EffortVector(vec![1.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }
}
