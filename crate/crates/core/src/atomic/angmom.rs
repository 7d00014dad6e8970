//! Clebsch-Gordan coefficients via the Racah closed form.
//!
//! Only small angular momenta appear in this crate (j <= 5/2, photon rank
//! k <= 2), so a factorial-table evaluation is exact to machine precision.

use super::half::Half;

// f64 holds every integer factorial up to 18! exactly; arguments here stay
// well below that.
const MAX_FACT: usize = 34;

fn factorials() -> [f64; MAX_FACT + 1] {
    let mut f = [1.0_f64; MAX_FACT + 1];
    for n in 1..=MAX_FACT {
        f[n] = f[n - 1] * n as f64;
    }
    f
}

fn fact(twice: i32) -> f64 {
    debug_assert!(twice >= 0 && twice % 2 == 0, "factorial of non-integer");
    let n = (twice / 2) as usize;
    assert!(n <= MAX_FACT, "factorial table exceeded");
    factorials()[n]
}

/// Clebsch-Gordan coefficient <j1 m1; j2 m2 | j m> in the Condon-Shortley
/// phase convention. Returns 0 for arguments violating the triangle or
/// projection rules.
pub fn clebsch_gordan(j1: Half, m1: Half, j2: Half, m2: Half, j: Half, m: Half) -> f64 {
    let (tj1, tm1) = (j1.twice(), m1.twice());
    let (tj2, tm2) = (j2.twice(), m2.twice());
    let (tj, tm) = (j.twice(), m.twice());

    if tm1 + tm2 != tm {
        return 0.0;
    }
    if tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj {
        return 0.0;
    }
    // parity of projections must match the respective j
    if (tj1 - tm1) % 2 != 0 || (tj2 - tm2) % 2 != 0 || (tj - tm) % 2 != 0 {
        return 0.0;
    }
    // triangle rule
    if tj < (tj1 - tj2).abs() || tj > tj1 + tj2 || (tj1 + tj2 - tj) % 2 != 0 {
        return 0.0;
    }

    let prefactor = ((tj + 1) as f64
        * fact(tj1 + tj2 - tj)
        * fact(tj1 - tj2 + tj)
        * fact(-tj1 + tj2 + tj)
        / fact(tj1 + tj2 + tj + 2))
    .sqrt();

    let root = (fact(tj1 + tm1)
        * fact(tj1 - tm1)
        * fact(tj2 + tm2)
        * fact(tj2 - tm2)
        * fact(tj + tm)
        * fact(tj - tm))
    .sqrt();

    // summation index k runs over all integers keeping factorial args >= 0
    let k_min = 0
        .max(tj2 - tj - tm1)
        .max(tj1 - tj + tm2);
    let k_max = (tj1 + tj2 - tj)
        .min(tj1 - tm1)
        .min(tj2 + tm2);

    let mut sum = 0.0;
    let mut tk = k_min;
    while tk <= k_max {
        let sign = if (tk / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let denom = fact(tk)
            * fact(tj1 + tj2 - tj - tk)
            * fact(tj1 - tm1 - tk)
            * fact(tj2 + tm2 - tk)
            * fact(tj - tj2 + tm1 + tk)
            * fact(tj - tj1 - tm2 + tk);
        sum += sign / denom;
        tk += 2;
    }

    prefactor * root * sum
}
