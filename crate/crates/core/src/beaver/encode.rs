use super::BeaverError;
use crate::bits::BitString;
use crate::tinyvm::{decode_plain, elias_encode, elias_len};

/// Turns a plain program into a prefix program with the same behaviour:
/// `E(n+2) || 0^(n+2-|q|) || q`. The zero padding lands in the plain
/// header, so the body runs exactly like `q`.
pub fn encode_plain_as_prefix(q: &BitString, n: u64) -> Result<BitString, BeaverError> {
    decode_plain(q)?;
    let room = n + 2;
    if q.len() as u64 > room {
        return Err(BeaverError::PadError { len: q.len(), room });
    }
    let mut out = elias_encode(room);
    out.extend_from(&BitString::zeros((room - q.len() as u64) as usize));
    out.extend_from(q);
    Ok(out)
}

/// `|E(n+2)| + n + 2 = 2*floor(log2(n+3)) + 1 + n + 2`.
pub fn encoded_len(n: u64) -> usize {
    elias_len(n + 2) + n as usize + 2
}
