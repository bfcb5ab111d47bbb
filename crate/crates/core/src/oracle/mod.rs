//! Brute-force symbolic checks of the identities behind the coefficient
//! formulae, and exact low-dimensional quadrature for the Monte Carlo engine.

mod checks;
mod laurent;
mod quadrature;

pub use checks::{
    check_derivative_lemmas, check_gamma_det, check_integral_prop1, check_integral_prop2,
    gamma_suite, lemma_suite, prop1_suite, prop2_suite, CheckOutcome,
};
pub use laurent::{contour_extract, FormalPolyN, MultiLaurent};
pub use quadrature::weyl_quadrature_moment;

/// All permutations of `0..k` with their parity (`true` for odd).
pub fn signed_permutations(k: usize) -> Vec<(Vec<usize>, bool)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    permute(&mut perm, 0, false, &mut out);
    out
}

fn permute(perm: &mut Vec<usize>, start: usize, odd: bool, out: &mut Vec<(Vec<usize>, bool)>) {
    if start == perm.len() {
        out.push((perm.clone(), odd));
        return;
    }
    for i in start..perm.len() {
        perm.swap(start, i);
        permute(perm, start + 1, odd ^ (i != start), out);
        perm.swap(start, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_parity() {
        let perms = signed_permutations(4);
        assert_eq!(perms.len(), 24);
        for (p, odd) in &perms {
            let inversions = (0..4)
                .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            assert_eq!(inversions % 2 == 1, *odd, "{p:?}");
        }
        assert_eq!(signed_permutations(0), vec![(vec![], false)]);
    }
}
