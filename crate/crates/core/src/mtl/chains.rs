use super::FiniteMtl;

/// Every MTL-chain on `n` elements, one per isomorphism class.
///
/// On a chain the order is fixed, so two chains are isomorphic only if
/// their tables coincide. We enumerate monotone commutative multiplications
/// on the interior elements with `x*y <= min(x, y)`, keep the associative
/// ones, and take residuals `x->y = max{z : x*z <= y}`.
pub fn enumerate_chains(n: usize) -> Vec<FiniteMtl> {
    assert!(n >= 1);
    if n <= 2 {
        return vec![FiniteMtl::lukasiewicz(n)];
    }
    let top = n - 1;
    let mut mul = vec![vec![0; n]; n];
    for x in 0..n {
        mul[x][top] = x;
        mul[top][x] = x;
    }
    let pairs: Vec<(usize, usize)> = (1..top).flat_map(|i| (i..top).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    fill(&mut mul, &pairs, 0, &mut out);
    out
}

fn fill(mul: &mut [Vec<usize>], pairs: &[(usize, usize)], k: usize, out: &mut Vec<FiniteMtl>) {
    if k == pairs.len() {
        if associative(mul) {
            out.push(FiniteMtl::from_chain_mul(mul));
        }
        return;
    }
    let (i, j) = pairs[k];
    // monotone in each argument: at least the left and lower neighbours
    let lo = mul[i - 1][j].max(mul[i][j - 1]);
    for v in lo..=i {
        mul[i][j] = v;
        mul[j][i] = v;
        fill(mul, pairs, k + 1, out);
    }
    mul[i][j] = 0;
    mul[j][i] = 0;
}

fn associative(mul: &[Vec<usize>]) -> bool {
    let n = mul.len();
    (0..n).all(|x| (0..n).all(|y| (0..n).all(|z| mul[mul[x][y]][z] == mul[x][mul[y][z]])))
}
