//! Scalar helpers shared by the model and the losses.

/// Largest double strictly below one.
pub const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

/// Logistic function, evaluated on the branch that cannot overflow.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `sigmoid(x) * (1 - sigmoid(x))` computed without cancellation.
#[inline]
pub fn sigmoid_grad(x: f64) -> f64 {
    let e = libm::exp(-libm::fabs(x));
    e / ((1.0 + e) * (1.0 + e))
}

/// `(sigmoid(x), sigmoid_grad(x))` from a single exponential; bit-equal to
/// calling both.
#[inline]
pub fn sigmoid_with_grad(x: f64) -> (f64, f64) {
    let e = libm::exp(-libm::fabs(x));
    let s = if x >= 0.0 { 1.0 / (1.0 + e) } else { e / (1.0 + e) };
    (s, e / ((1.0 + e) * (1.0 + e)))
}

/// Sigmoid clamped to the open interval (0, 1) so log-losses stay finite.
#[inline]
pub fn open_unit_sigmoid(x: f64) -> f64 {
    sigmoid(x).clamp(f64::MIN_POSITIVE, ONE_MINUS_ULP)
}

/// Sign with `sign(0) = 0`: the subgradient of `|x|` used at the kink.
#[inline]
pub fn abs_subgradient(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
