/// Binomial coefficient with `C(x, y) = 0` whenever `y < 0` or `y > x`.
pub fn binomial(x: i64, y: i64) -> i128 {
    if y < 0 || x < 0 || y > x {
        return 0;
    }
    let y = y.min(x - y);
    let mut acc: i128 = 1;
    for i in 0..y {
        acc = acc * (x - i) as i128 / (i + 1) as i128;
    }
    acc
}

pub fn factorial(n: u32) -> i128 {
    (1..=n as i128).product()
}

/// All vectors of `len` nonnegative integers with the given total and
/// `lo[i] <= v[i] <= hi[i]`, in lexicographic order.
pub fn bounded_compositions(total: u32, lo: &[u32], hi: &[u32]) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; lo.len()];
    fn rec(
        slot: usize,
        remaining: u32,
        lo: &[u32],
        hi: &[u32],
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if slot == cur.len() {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if lo[slot] > hi[slot] {
            return;
        }
        for v in lo[slot]..=hi[slot].min(remaining) {
            cur[slot] = v;
            rec(slot + 1, remaining - v, lo, hi, cur, out);
        }
    }
    if lo.is_empty() {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, total, lo, hi, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(binomial(3, -1), 0);
        assert_eq!(binomial(10, 10), 1);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), 1);
        assert_eq!(factorial(5), 120);
    }

    #[test]
    fn compositions_respect_bounds() {
        let v = bounded_compositions(3, &[0, 1], &[2, 3]);
        assert_eq!(v, vec![vec![0, 3], vec![1, 2], vec![2, 1]]);
        assert!(bounded_compositions(5, &[0, 0], &[1, 1]).is_empty());
    }
}
