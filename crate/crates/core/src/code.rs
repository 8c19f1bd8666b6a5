//! Polar code construction, encoding and CRC handling.

use crate::sequence;
use crate::{Error, Result};

/// CCITT polynomial x^16 + x^12 + x^5 + 1, used for the outer CRC.
pub const CRC16_POLY: u64 = 0x1021;

/// How the information set is selected.
#[derive(Debug, Clone, PartialEq)]
pub enum CodeConstructionSource {
    /// Reliability-sequence construction (built-in length-1024 asset).
    FiveGSequence,
    /// Gaussian-approximation density evolution at the given design Eb/N0 (dB).
    GaussianApproximation { design_snr_db: f64 },
    /// An externally supplied sequence, least reliable first.
    CustomSequence(Vec<usize>),
}

/// A polar code PC(N, K) with a C-bit outer CRC.
///
/// The information set `info_set` carries K + C indices; the CRC bits occupy
/// the last C positions of the info-bit stream before scattering.
#[derive(Debug, Clone)]
pub struct PolarCode {
    pub n_bits: usize,
    pub block_len: usize,
    pub info_len: usize,
    pub crc_len: usize,
    pub info_set: Vec<usize>,
    pub frozen: Vec<bool>,
    pub crc_poly: u64,
}

impl PolarCode {
    /// N, the block length.
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// K + C, the number of non-frozen positions.
    pub fn unfrozen_len(&self) -> usize {
        self.info_len + self.crc_len
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    /// Extract the K + C info-stream bits from a length-N leaf estimate.
    pub fn extract_info(&self, u_hat: &[u8]) -> Vec<u8> {
        self.info_set.iter().map(|&i| u_hat[i]).collect()
    }

    /// CRC over the first K bits of the info stream against its trailing C bits.
    pub fn crc_check(&self, info: &[u8]) -> bool {
        if self.crc_len == 0 {
            return true;
        }
        debug_assert_eq!(info.len(), self.unfrozen_len());
        let (msg, tail) = info.split_at(self.info_len);
        crc_for_message(msg, self.crc_poly, self.crc_len) == tail
    }

    /// Message || CRC, the bit stream scattered into the info set.
    pub fn assemble_info(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.info_len {
            return Err(Error::LengthMismatch {
                expected: self.info_len,
                got: message.len(),
            });
        }
        let mut info = message.to_vec();
        info.extend(crc_for_message(message, self.crc_poly, self.crc_len));
        Ok(info)
    }

    /// The length-N leaf vector u for a message: info stream scattered into
    /// the non-frozen positions, zeros elsewhere.
    pub fn assemble_u(&self, message: &[u8]) -> Result<Vec<u8>> {
        let info = self.assemble_info(message)?;
        let mut u = vec![0u8; self.block_len];
        for (bit, &pos) in info.iter().zip(self.info_set.iter()) {
            u[pos] = *bit;
        }
        Ok(u)
    }

    /// Encode a K-bit message into an N-bit codeword.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        let mut u = self.assemble_u(message)?;
        polar_transform(&mut u);
        Ok(u)
    }
}

/// Construct a polar code with |A| = K + C most reliable indices.
pub fn construct_code(
    n: usize,
    k: usize,
    c: usize,
    source: &CodeConstructionSource,
) -> Result<PolarCode> {
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::InvalidCode(format!("N = {n} is not a power of two >= 2")));
    }
    if k + c > n {
        return Err(Error::InvalidCode(format!("K + C = {} exceeds N = {n}", k + c)));
    }
    if k == 0 {
        return Err(Error::InvalidCode("K must be positive".into()));
    }
    let reliability: Vec<usize> = match source {
        CodeConstructionSource::FiveGSequence => {
            sequence::subsequence(&sequence::builtin_sequence(), n)?
        }
        CodeConstructionSource::CustomSequence(seq) => sequence::subsequence(seq, n)?,
        CodeConstructionSource::GaussianApproximation { design_snr_db } => {
            let rate = k as f64 / n as f64;
            let mu_ch = 4.0 * rate * 10f64.powf(design_snr_db / 10.0);
            let means = crate::analysis::ga_evolve(n, mu_ch)?;
            // ascending mean = ascending reliability; ties break on lower index
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                means.leaf_means[a]
                    .partial_cmp(&means.leaf_means[b])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            order
        }
    };
    let mut info_set: Vec<usize> = reliability[n - (k + c)..].to_vec();
    info_set.sort_unstable();
    let mut frozen = vec![true; n];
    for &i in &info_set {
        frozen[i] = false;
    }
    Ok(PolarCode {
        n_bits: n.trailing_zeros() as usize,
        block_len: n,
        info_len: k,
        crc_len: c,
        info_set,
        frozen,
        crc_poly: CRC16_POLY,
    })
}

/// In-place polar transform x = u G^{kron n} over GF(2). Involutive.
pub fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    debug_assert!(n.is_power_of_two());
    let mut d = 1;
    while d < n {
        let mut base = 0;
        while base < n {
            for i in base..base + d {
                bits[i] ^= bits[i + d];
            }
            base += 2 * d;
        }
        d *= 2;
    }
}

/// Raw GF(2) polynomial remainder of `bits` (MSB first) modulo the CRC
/// generator; zero initial register, no reflection, no final XOR.
pub fn crc_remainder(bits: &[u8], poly: u64, crc_len: usize) -> Vec<u8> {
    if crc_len == 0 {
        return Vec::new();
    }
    let top = 1u64 << crc_len;
    let mut reg = 0u64;
    for &b in bits {
        reg = (reg << 1) | u64::from(b & 1);
        if reg & top != 0 {
            reg ^= top | poly;
        }
    }
    (0..crc_len).rev().map(|i| ((reg >> i) & 1) as u8).collect()
}

/// CRC of a message: remainder of message(x) * x^C.
pub fn crc_for_message(msg: &[u8], poly: u64, crc_len: usize) -> Vec<u8> {
    let mut padded = msg.to_vec();
    padded.extend(std::iter::repeat(0).take(crc_len));
    crc_remainder(&padded, poly, crc_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;

    /// Bitwise shift-and-XOR long division, kept independent of the
    /// register-based implementation above.
    fn crc_oracle(bits: &[u8], poly: u64, crc_len: usize) -> Vec<u8> {
        let mut work: Vec<u8> = bits.to_vec();
        let gen: Vec<u8> = {
            let mut g = vec![1u8];
            g.extend((0..crc_len).rev().map(|i| ((poly >> i) & 1) as u8));
            g
        };
        if work.len() >= gen.len() {
            for start in 0..=(work.len() - gen.len()) {
                if work[start] == 1 {
                    for (j, &gbit) in gen.iter().enumerate() {
                        work[start + j] ^= gbit;
                    }
                }
            }
        }
        let mut rem = vec![0u8; crc_len];
        let tail = work.len().min(crc_len);
        rem[crc_len - tail..].copy_from_slice(&work[work.len() - tail..]);
        rem
    }

    #[test]
    fn crc_all_zero_input() {
        assert_eq!(crc_remainder(&[0; 40], CRC16_POLY, 16), vec![0u8; 16]);
    }

    #[test]
    fn crc_single_one_then_sixteen_zeros() {
        let mut bits = vec![0u8; 17];
        bits[0] = 1;
        let rem = crc_remainder(&bits, CRC16_POLY, 16);
        let val = rem.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
        assert_eq!(val, 0x1021);
    }

    #[test]
    fn crc_matches_long_division_oracle() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let bits: Vec<u8> = (0..512).map(|_| rng.gen_range(0..2u8)).collect();
            assert_eq!(
                crc_remainder(&bits, CRC16_POLY, 16),
                crc_oracle(&bits, CRC16_POLY, 16)
            );
        }
    }

    #[test]
    fn crc_check_detects_single_bit_flips() {
        let code = construct_code(64, 20, 16, &CodeConstructionSource::FiveGSequence).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        let msg: Vec<u8> = (0..20).map(|_| rng.gen_range(0..2u8)).collect();
        let info = code.assemble_info(&msg).unwrap();
        assert!(code.crc_check(&info));
        for i in 0..info.len() {
            let mut bad = info.clone();
            bad[i] ^= 1;
            assert!(!code.crc_check(&bad), "flip at {i} went undetected");
        }
    }

    #[test]
    fn crc_check_roundtrip_many_messages() {
        let code = construct_code(256, 100, 16, &CodeConstructionSource::FiveGSequence).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..10_000 {
            let msg: Vec<u8> = (0..100).map(|_| rng.gen_range(0..2u8)).collect();
            assert!(code.crc_check(&code.assemble_info(&msg).unwrap()));
        }
    }

    #[test]
    fn transform_kernel_n2() {
        let mut u = vec![0u8, 1];
        polar_transform(&mut u);
        assert_eq!(u, vec![1, 1]);
    }

    #[test]
    fn transform_is_involution() {
        let mut rng = StdRng::seed_from_u64(5);
        for n_bits in 1..=10 {
            let n = 1usize << n_bits;
            let u: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
            let mut v = u.clone();
            polar_transform(&mut v);
            polar_transform(&mut v);
            assert_eq!(u, v);
        }
    }

    #[test]
    fn transform_matches_dense_kronecker_matrix() {
        // brute-force G^{kron n} by repeated Kronecker products
        let n_bits = 6;
        let n = 1usize << n_bits;
        let mut g = vec![vec![1u8]];
        for _ in 0..n_bits {
            let m = g.len();
            let mut next = vec![vec![0u8; 2 * m]; 2 * m];
            for r in 0..m {
                for c in 0..m {
                    // kernel [[1,0],[1,1]] (x) g
                    next[r][c] = g[r][c];
                    next[m + r][c] = g[r][c];
                    next[m + r][m + c] = g[r][c];
                }
            }
            g = next;
        }
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..20 {
            let u: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
            let mut fast = u.clone();
            polar_transform(&mut fast);
            let slow: Vec<u8> = (0..n)
                .map(|c| (0..n).map(|r| u[r] & g[r][c]).fold(0, |a, b| a ^ b))
                .collect();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn all_zero_message_encodes_to_all_zero() {
        let code = construct_code(128, 50, 16, &CodeConstructionSource::FiveGSequence).unwrap();
        assert_eq!(code.encode(&vec![0; 50]).unwrap(), vec![0u8; 128]);
    }

    #[test]
    fn construct_rejects_bad_dimensions() {
        assert!(construct_code(100, 50, 0, &CodeConstructionSource::FiveGSequence).is_err());
        assert!(construct_code(64, 60, 16, &CodeConstructionSource::FiveGSequence).is_err());
        assert!(construct_code(2048, 1024, 0, &CodeConstructionSource::FiveGSequence).is_err());
    }

    #[test]
    fn construct_full_rate_has_no_frozen_indices() {
        let code = construct_code(2, 2, 0, &CodeConstructionSource::FiveGSequence).unwrap();
        assert_eq!(code.info_set, vec![0, 1]);
        assert!(code.frozen.iter().all(|&f| !f));
    }

    #[test]
    fn construct_pc1024_512_crc16_has_528_info_indices() {
        let code = construct_code(1024, 512, 16, &CodeConstructionSource::FiveGSequence).unwrap();
        assert_eq!(code.info_set.len(), 528);
        assert_eq!(code.frozen.iter().filter(|&&f| f).count(), 1024 - 528);
    }

    #[test]
    fn construct_is_deterministic() {
        let a = construct_code(256, 128, 8, &CodeConstructionSource::FiveGSequence).unwrap();
        let b = construct_code(256, 128, 8, &CodeConstructionSource::FiveGSequence).unwrap();
        assert_eq!(a.info_set, b.info_set);
        let g1 = construct_code(
            256,
            128,
            0,
            &CodeConstructionSource::GaussianApproximation { design_snr_db: 2.0 },
        )
        .unwrap();
        let g2 = construct_code(
            256,
            128,
            0,
            &CodeConstructionSource::GaussianApproximation { design_snr_db: 2.0 },
        )
        .unwrap();
        assert_eq!(g1.info_set, g2.info_set);
    }

    #[test]
    fn ga_construction_picks_largest_mean_leaves() {
        let code = construct_code(
            8,
            4,
            0,
            &CodeConstructionSource::GaussianApproximation { design_snr_db: 2.0 },
        )
        .unwrap();
        let mu_ch = 4.0 * 0.5 * 10f64.powf(0.2);
        let means = crate::analysis::ga_evolve(8, mu_ch).unwrap();
        let mut order: Vec<usize> = (0..8).collect();
        order.sort_by(|&a, &b| means.leaf_means[b].partial_cmp(&means.leaf_means[a]).unwrap());
        let mut expect: Vec<usize> = order[..4].to_vec();
        expect.sort_unstable();
        assert_eq!(code.info_set, expect);
    }
}
