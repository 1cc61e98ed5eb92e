//! Fractional ranking.

/// 1-based ascending ranks; tied values share the mean of the ranks they span.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Positions i..j hold equal values: ranks i+1 ..= j.
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_and_tied() {
        assert_eq!(mid_ranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
        assert_eq!(mid_ranks(&[1.0, 2.0, 2.0, 5.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(mid_ranks(&[7.0; 4]), vec![2.5; 4]);
        assert!(mid_ranks(&[]).is_empty());
    }

    #[test]
    fn ranks_sum_to_triangular_number() {
        let v = [0.5, -1.0, 0.5, 3.0, 3.0, 3.0, 2.0];
        let n = v.len() as f64;
        assert_eq!(mid_ranks(&v).iter().sum::<f64>(), n * (n + 1.0) / 2.0);
    }
}
