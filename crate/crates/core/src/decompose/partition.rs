/// Ordered partition `(p_1, …, p_k)` of `n` into positive parts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition(pub Vec<usize>);

impl Partition {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Member of `Q(n, l)`: odd length and every even-position part equal to 1.
    pub fn is_q(&self) -> bool {
        self.0.len() % 2 == 1 && self.0.iter().skip(1).step_by(2).all(|&p| p == 1)
    }

    /// Zero-based inclusive variable ranges `R_j` of the consecutive blocks.
    pub fn ranges(&self) -> Vec<(usize, usize)> {
        let mut start = 0;
        self.0
            .iter()
            .map(|&p| {
                let r = (start, start + p - 1);
                start += p;
                r
            })
            .collect()
    }

    /// Index of the largest part, the first one on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }
}

fn compositions(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k == 0 {
        if n == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    if n < k {
        return;
    }
    for first in 1..=n - (k - 1) {
        prefix.push(first);
        compositions(n - first, k - 1, prefix, out);
        prefix.pop();
    }
}

/// `P(n, k)` in lexicographic order.
pub fn p_partitions(n: usize, k: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    compositions(n, k, &mut Vec::new(), &mut out);
    out.into_iter().map(Partition).collect()
}

/// `Q(n, l) ⊂ P(n, 2l+1)` in lexicographic order; empty when `n < 2l + 1`.
pub fn q_partitions(n: usize, l: usize) -> Vec<Partition> {
    if n < 2 * l + 1 {
        return Vec::new();
    }
    let mut odd = Vec::new();
    compositions(n - l, l + 1, &mut Vec::new(), &mut odd);
    let mut out: Vec<Partition> = odd
        .into_iter()
        .map(|parts| {
            let mut v = Vec::with_capacity(2 * l + 1);
            for (i, p) in parts.into_iter().enumerate() {
                if i > 0 {
                    v.push(1);
                }
                v.push(p);
            }
            Partition(v)
        })
        .collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_small_cases() {
        assert_eq!(q_partitions(3, 1), vec![Partition(vec![1, 1, 1])]);
        assert!(q_partitions(4, 2).is_empty());
        assert_eq!(q_partitions(8, 2).len(), 10);
        assert!(q_partitions(9, 3).iter().all(|p| p.is_q() && p.total() == 9));
    }

    #[test]
    fn p_count_is_binomial() {
        // C(n-1, k-1) compositions.
        assert_eq!(p_partitions(7, 3).len(), 15);
        assert_eq!(p_partitions(5, 5), vec![Partition(vec![1; 5])]);
    }

    #[test]
    fn ranges_and_argmax() {
        let p = Partition(vec![2, 1, 3]);
        assert_eq!(p.ranges(), vec![(0, 1), (2, 2), (3, 5)]);
        assert_eq!(p.argmax(), 2);
        assert_eq!(Partition(vec![2, 1, 2]).argmax(), 0);
    }
}
