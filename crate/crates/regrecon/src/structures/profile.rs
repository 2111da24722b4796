use super::poly::Poly1;

/// A compactly supported bump profile `η(u) = amp · p((u - shift)/width)` on
/// `|u - shift| ≤ width`, zero outside. Derivatives come from the exact
/// polynomial derivative, never from finite differences.
#[derive(Clone, Debug)]
pub struct Profile {
    poly: Poly1,
    derivs: Vec<Poly1>,
    shift: f64,
    width: f64,
    amp: f64,
}

impl Profile {
    pub fn new(poly: Poly1, shift: f64, width: f64, amp: f64, max_order: u32) -> Self {
        assert!(width > 0.0);
        let mut derivs = vec![poly.clone()];
        for _ in 0..max_order {
            let next = derivs.last().unwrap().derivative();
            derivs.push(next);
        }
        Profile {
            poly,
            derivs,
            shift,
            width,
            amp,
        }
    }

    pub fn max_order(&self) -> u32 {
        (self.derivs.len() - 1) as u32
    }

    /// Support is `[shift - width, shift + width]`.
    pub fn support(&self) -> (f64, f64) {
        (self.shift - self.width, self.shift + self.width)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.deriv_eval(0, u)
    }

    pub fn deriv_eval(&self, order: u32, u: f64) -> f64 {
        let v = (u - self.shift) / self.width;
        if v.abs() > 1.0 {
            return 0.0;
        }
        let p = &self.derivs[order as usize];
        self.amp * p.eval(v) / self.width.powi(order as i32)
    }

    /// Exact ∫ η(u) du.
    pub fn integral(&self) -> f64 {
        self.amp * self.width * self.poly.integral_unit_interval()
    }

    /// Exact ∫ u^k η(u) du via binomial expansion of (shift + width v)^k.
    pub fn moment(&self, k: u32) -> f64 {
        let mut acc = 0.0;
        let mut binom = 1.0f64;
        for j in 0..=k {
            // binom(k, j) shift^{k-j} width^j ∫ v^j p(v) dv
            acc += binom
                * self.shift.powi((k - j) as i32)
                * self.width.powi(j as i32 + 1)
                * self.poly.moment_unit_interval(j);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        self.amp * acc
    }

    /// max over m ≤ r of sup |D^m η| (numerical sup).
    pub fn cr_norm(&self, r: u32) -> f64 {
        (0..=r.min(self.max_order()))
            .map(|m| {
                self.amp.abs() * self.derivs[m as usize].sup_unit_interval()
                    / self.width.powi(m as i32)
            })
            .fold(0.0, f64::max)
    }

    pub fn scaled_amp(&self, factor: f64) -> Profile {
        let mut out = self.clone();
        out.amp *= factor;
        out
    }

    /// Rescales so the C^r norm is 1; the result lies in the unit ball of the
    /// test-function class when the support sits inside [-1, 1].
    pub fn normalized_cr(&self, r: u32) -> Profile {
        let n = self.cr_norm(r);
        assert!(n > 0.0);
        self.scaled_amp(1.0 / n)
    }

    /// Rescales to unit sup-norm.
    pub fn normalized_sup(&self) -> Profile {
        let n = self.cr_norm(0);
        assert!(n > 0.0);
        self.scaled_amp(1.0 / n)
    }

    /// Rescales so ∫ η = 1 (mollifier normalization).
    pub fn normalized_integral(&self) -> Profile {
        let i = self.integral();
        assert!(i.abs() > 0.0);
        self.scaled_amp(1.0 / i)
    }

    /// The profile of D η, tracked as its own profile with one derivative
    /// order less available.
    pub fn derivative_profile(&self) -> Profile {
        assert!(self.max_order() >= 1);
        Profile {
            poly: self.derivs[1].clone(),
            derivs: self.derivs[1..].to_vec(),
            shift: self.shift,
            width: self.width,
            amp: self.amp / self.width,
        }
    }
}

/// The reference bump `(1 - u²)^{r+1}` on the unit ball, scaled so that all
/// derivatives up to order r have sup-norm at most 1.
pub fn make_bump(r: u32) -> Profile {
    assert!(r >= 1);
    let raw = Profile::new(Poly1::one_minus_square_pow(r + 1), 0.0, 1.0, 1.0, r + 1);
    raw.normalized_cr(r)
}

/// A centered, rescaled test function `η^δ_x(y) = δ^{-1} η((y - x)/δ)` in one
/// dimension.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub profile: Profile,
    pub center: f64,
    pub scale: f64,
}

impl TestFunction {
    pub fn new(profile: Profile, center: f64, scale: f64) -> Self {
        assert!(scale > 0.0 && scale <= 1.0);
        TestFunction {
            profile,
            center,
            scale,
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.profile.eval((y - self.center) / self.scale) / self.scale
    }

    /// ∫ |η^δ_x| is independent of δ; exposed for the rescaling invariant.
    pub fn abs_integral(&self) -> f64 {
        // the reference profiles are sign-definite or odd; integrate |p| by
        // splitting at the sign changes of the polynomial is overkill here,
        // a fine Riemann sum on the unit interval is enough for the check.
        let n = 1 << 12;
        let mut acc = 0.0;
        for i in 0..n {
            let u = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
            acc += self.profile.eval(u).abs();
        }
        acc * 2.0 / n as f64
    }
}

/// The finite family used to probe suprema over the test-function class:
/// one bump, its first r derivative profiles, and two off-center narrower
/// bumps that pick up one-sided increments. Every member is sup-normalized;
/// suprema over the class are estimated from below up to the family's
/// derivative constants.
#[derive(Clone, Debug)]
pub struct TestFamily {
    profiles: Vec<Profile>,
    order: u32,
}

impl TestFamily {
    pub fn standard(r: u32) -> Self {
        let bump = Profile::new(Poly1::one_minus_square_pow(r + 1), 0.0, 1.0, 1.0, r + 1);
        let mut profiles = vec![bump.clone().normalized_sup()];
        let mut current = bump;
        for _ in 0..r {
            current = current.derivative_profile();
            profiles.push(current.clone().normalized_sup());
        }
        for shift in [0.4, -0.4] {
            let off = Profile::new(Poly1::one_minus_square_pow(r + 1), shift, 0.6, 1.0, r + 1);
            profiles.push(off.normalized_sup());
        }
        TestFamily { profiles, order: r }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }
}
