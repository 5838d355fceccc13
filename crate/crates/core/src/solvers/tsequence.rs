/// The extrapolation scalars `t_1, t_2, ...` with
/// `t_{k+1} = min{(1 + sqrt(1 + 4 t_k^2)) / 2, sqrt(t_k^2 + a t_k)}`,
/// where `a = mu_g * beta`.
///
/// Each computed term is rounded down, one ulp at a time, until
/// `t_{k+1}^2 - t_{k+1} <= t_k^2` and `t_{k+1}^2 <= t_k^2 + a t_k` hold in
/// floating point; the energy argument needs both inequalities and a plain
/// evaluation overshoots them by an ulp roughly a quarter of the time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TSequence {
    t: f64,
    a: f64,
}

impl TSequence {
    pub fn new(t1: f64, a: f64) -> Self {
        assert!(t1 >= 1.0 && a >= 0.0, "need t1 >= 1 and a >= 0");
        TSequence { t: t1, a }
    }

    pub fn current(&self) -> f64 {
        self.t
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Advances to and returns the next term.
    pub fn next_t(&mut self) -> f64 {
        self.t = next_t(self.t, self.a);
        self.t
    }
}

impl Iterator for TSequence {
    type Item = f64;
    fn next(&mut self) -> Option<f64> {
        Some(self.next_t())
    }
}

/// Next term of the accelerated sequence from `t` with strong-convexity
/// product `a`.
pub fn next_t(t: f64, a: f64) -> f64 {
    let nesterov = nesterov_next(t);
    let strong = round_down_until(((t * t) + a * t).sqrt(), |c| c * c <= t * t + a * t);
    nesterov.min(strong)
}

/// `(1 + sqrt(1 + 4 t^2)) / 2`, rounded so that `c^2 - c <= t^2` holds.
pub fn nesterov_next(t: f64) -> f64 {
    round_down_until((1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0, |c| {
        c * c - c <= t * t
    })
}

/// True when the Nesterov branch is the one `next_t` selects.
pub fn nesterov_branch(t: f64, a: f64) -> bool {
    next_t(t, a) == nesterov_next(t)
}

/// Lower bound `min{1/2, b} (k + 1)` on `t_k`, `b = 2 a t1 / (a + 4 t1)`.
pub fn growth_lower_bound(t1: f64, a: f64, k: usize) -> f64 {
    let b = 2.0 * a * t1 / (a + 4.0 * t1);
    b.min(0.5) * (k as f64 + 1.0)
}

fn round_down_until(mut c: f64, ok: impl Fn(f64) -> bool) -> f64 {
    while !ok(c) {
        c = c.next_down();
    }
    c
}
