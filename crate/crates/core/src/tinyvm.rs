//! `tinyvm-v1`: an eight-opcode tape machine with a plain and a prefix-free
//! decompressor.
//!
//! A plain program is a header `0^k 1` followed by a payload of 3-bit
//! opcodes (most significant bit first; one or two trailing bits are
//! dropped):
//!
//! | bits | opcode      | effect                                          |
//! |------|-------------|-------------------------------------------------|
//! | 000  | `Inc`       | current cell += 1                               |
//! | 001  | `Dec`       | current cell -= 1, floored at 0                 |
//! | 010  | `Right`     | head += 1                                       |
//! | 011  | `Left`      | head -= 1, floored at cell 0                    |
//! | 100  | `LoopStart` | if cell == 0 jump past the matching `LoopEnd`   |
//! | 101  | `LoopEnd`   | if cell != 0 jump past the matching `LoopStart` |
//! | 110  | `Double`    | current cell *= 2                               |
//! | 111  | `Halt`      | stop                                            |
//!
//! Cells hold unbounded naturals, the tape is right-infinite and starts all
//! zero. Every executed opcode costs one step; running off the end halts for
//! free. The output is cell 0.
//!
//! A prefix program is `E(l) || body` where `E` is the Elias-gamma style
//! code of [`elias_encode`] and `body` is a plain program of exactly `l`
//! bits.

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::bits::BitString;

pub const MACHINE_VERSION: &str = "tinyvm-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Opcode {
    Inc,
    Dec,
    Right,
    Left,
    LoopStart,
    LoopEnd,
    Double,
    Halt,
}

impl Opcode {
    pub const ALL: [Opcode; 8] = [
        Opcode::Inc,
        Opcode::Dec,
        Opcode::Right,
        Opcode::Left,
        Opcode::LoopStart,
        Opcode::LoopEnd,
        Opcode::Double,
        Opcode::Halt,
    ];

    pub fn from_code(code: u8) -> Opcode {
        Opcode::ALL[(code & 7) as usize]
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum InvalidProgram {
    #[error("program has no header terminator")]
    NoHeader,
    #[error("unbalanced loop brackets")]
    Unbalanced,
}

/// Decoded opcodes with loop partners resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramImage {
    ops: Vec<Opcode>,
    partner: Vec<usize>,
}

impl ProgramImage {
    pub fn new(ops: Vec<Opcode>) -> Result<Self, InvalidProgram> {
        let mut partner = vec![usize::MAX; ops.len()];
        let mut open = Vec::new();
        for (pc, op) in ops.iter().enumerate() {
            match op {
                Opcode::LoopStart => open.push(pc),
                Opcode::LoopEnd => {
                    let start = open.pop().ok_or(InvalidProgram::Unbalanced)?;
                    partner[start] = pc;
                    partner[pc] = start;
                }
                _ => {}
            }
        }
        if !open.is_empty() {
            return Err(InvalidProgram::Unbalanced);
        }
        Ok(ProgramImage { ops, partner })
    }

    pub fn ops(&self) -> &[Opcode] {
        &self.ops
    }

    /// Matching bracket position for a loop opcode.
    pub fn partner(&self, pc: usize) -> Option<usize> {
        self.partner.get(pc).copied().filter(|&p| p != usize::MAX)
    }
}

/// The halting behaviour of one program under a step budget.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RunOutcome {
    Halt { output: BigUint, steps: u64 },
    StepLimit,
    Invalid,
}

impl RunOutcome {
    pub fn is_halt(&self) -> bool {
        matches!(self, RunOutcome::Halt { .. })
    }
}

pub fn decode_plain(p: &BitString) -> Result<ProgramImage, InvalidProgram> {
    decode_plain_bits(p.bits())
}

fn decode_plain_bits(bits: &[bool]) -> Result<ProgramImage, InvalidProgram> {
    let header_end = bits
        .iter()
        .position(|&b| b)
        .ok_or(InvalidProgram::NoHeader)?;
    let ops = bits[header_end + 1..]
        .chunks_exact(3)
        .map(|c| Opcode::from_code((c[0] as u8) << 2 | (c[1] as u8) << 1 | c[2] as u8))
        .collect();
    ProgramImage::new(ops)
}

#[derive(Debug)]
struct CellOverflow;

trait Cell: Clone {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn inc(&mut self) -> Result<(), CellOverflow>;
    fn dec(&mut self);
    fn double(&mut self) -> Result<(), CellOverflow>;
    fn into_natural(self) -> BigUint;
}

impl Cell for u64 {
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn inc(&mut self) -> Result<(), CellOverflow> {
        *self = self.checked_add(1).ok_or(CellOverflow)?;
        Ok(())
    }
    fn dec(&mut self) {
        *self = self.saturating_sub(1);
    }
    fn double(&mut self) -> Result<(), CellOverflow> {
        *self = self.checked_mul(2).ok_or(CellOverflow)?;
        Ok(())
    }
    fn into_natural(self) -> BigUint {
        BigUint::from(self)
    }
}

impl Cell for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn inc(&mut self) -> Result<(), CellOverflow> {
        *self += 1u8;
        Ok(())
    }
    fn dec(&mut self) {
        if !Zero::is_zero(self) {
            *self -= 1u8;
        }
    }
    fn double(&mut self) -> Result<(), CellOverflow> {
        *self <<= 1u8;
        Ok(())
    }
    fn into_natural(self) -> BigUint {
        self
    }
}

fn execute<C: Cell>(img: &ProgramImage, budget: u64) -> Result<RunOutcome, CellOverflow> {
    let ops = img.ops();
    let mut tape: Vec<C> = vec![C::zero()];
    let mut head = 0usize;
    let mut pc = 0usize;
    let mut steps = 0u64;
    while pc < ops.len() {
        if steps == budget {
            return Ok(RunOutcome::StepLimit);
        }
        steps += 1;
        match ops[pc] {
            Opcode::Inc => tape[head].inc()?,
            Opcode::Dec => tape[head].dec(),
            Opcode::Right => {
                head += 1;
                if head == tape.len() {
                    tape.push(C::zero());
                }
            }
            Opcode::Left => head = head.saturating_sub(1),
            Opcode::Double => tape[head].double()?,
            Opcode::Halt => break,
            Opcode::LoopStart => {
                if tape[head].is_zero() {
                    pc = img.partner[pc];
                }
            }
            Opcode::LoopEnd => {
                if !tape[head].is_zero() {
                    pc = img.partner[pc];
                }
            }
        }
        pc += 1;
    }
    let output = tape.swap_remove(0).into_natural();
    Ok(RunOutcome::Halt { output, steps })
}

/// Runs a decoded image for at most `budget` steps.
pub fn run_image(img: &ProgramImage, budget: u64) -> RunOutcome {
    // Machine-word cells first; a cell overflow replays with unbounded cells.
    execute::<u64>(img, budget)
        .or_else(|_| execute::<BigUint>(img, budget))
        .expect("unbounded cells cannot overflow")
}

pub fn run_plain(p: &BitString, budget: u64) -> RunOutcome {
    match decode_plain(p) {
        Ok(img) => run_image(&img, budget),
        Err(_) => RunOutcome::Invalid,
    }
}

/// `E(l)`: `k` zeros followed by the `k+1`-bit binary form of `l+1`, where
/// `k = floor(log2(l+1))`.
pub fn elias_encode(l: u64) -> BitString {
    let m = l.checked_add(1).expect("elias_encode argument out of range");
    let k = 63 - m.leading_zeros() as usize;
    let mut out = BitString::zeros(k);
    out.extend_from(&BitString::from_uint(m, k + 1));
    out
}

/// Length of `E(l)` without materializing it.
pub fn elias_len(l: u64) -> usize {
    let m = l + 1;
    2 * (63 - m.leading_zeros() as usize) + 1
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("truncated or oversized self-delimiting header")]
pub struct InvalidHeader;

/// Decodes a leading `E(l)`, returning `(l, bits consumed)`.
pub fn elias_decode(s: &BitString) -> Result<(u64, usize), InvalidHeader> {
    elias_decode_bits(s.bits())
}

fn elias_decode_bits(bits: &[bool]) -> Result<(u64, usize), InvalidHeader> {
    let k = bits.iter().position(|&b| b).ok_or(InvalidHeader)?;
    if k >= 64 || bits.len() < 2 * k + 1 {
        return Err(InvalidHeader);
    }
    let m = bits[k..=2 * k]
        .iter()
        .fold(0u64, |acc, &b| acc << 1 | b as u64);
    Ok((m - 1, 2 * k + 1))
}

/// Prefix-free decompressor: `E(l) || body` with `|body| == l` exactly.
pub fn run_prefix(p: &BitString, budget: u64) -> RunOutcome {
    let bits = p.bits();
    let Ok((l, used)) = elias_decode_bits(bits) else {
        return RunOutcome::Invalid;
    };
    if (bits.len() - used) as u64 != l {
        return RunOutcome::Invalid;
    }
    match decode_plain_bits(&bits[used..]) {
        Ok(img) => run_image(&img, budget),
        Err(_) => RunOutcome::Invalid,
    }
}

/// All strings `E(l) || body` of total length `<= max_len`, ordered by
/// length and then lexicographically.
pub fn enumerate_prefix_syntax(max_len: usize) -> Vec<BitString> {
    let mut out = Vec::new();
    for l in 0u64.. {
        let total = elias_len(l) + l as usize;
        if total > max_len {
            break;
        }
        let header = elias_encode(l);
        out.extend(BitString::all_of_len(l as usize).map(|body| header.concat(&body)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn halt(output: u64, steps: u64) -> RunOutcome {
        RunOutcome::Halt {
            output: output.into(),
            steps,
        }
    }

    #[test]
    fn opcode_table_is_bijective() {
        for code in 0..8u8 {
            assert_eq!(Opcode::from_code(code).code(), code);
        }
        assert_eq!(Opcode::from_code(0b110), Opcode::Double);
        assert_eq!(Opcode::from_code(0b111), Opcode::Halt);
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_plain(&b("1111")).unwrap().ops(), [Opcode::Halt]);
        assert_eq!(decode_plain(&b("0000")), Err(InvalidProgram::NoHeader));
        assert_eq!(
            decode_plain(&b("1000110")).unwrap().ops(),
            [Opcode::Inc, Opcode::Double]
        );
        assert_eq!(decode_plain(&b("1100")), Err(InvalidProgram::Unbalanced));
        assert_eq!(decode_plain(&b("1101")), Err(InvalidProgram::Unbalanced));
        // trailing bits dropped
        assert_eq!(decode_plain(&b("100011")).unwrap().ops(), [Opcode::Inc]);
        let img = decode_plain(&b("1100101")).unwrap();
        assert_eq!(img.partner(0), Some(1));
        assert_eq!(img.partner(1), Some(0));
    }

    #[test]
    fn run_plain_examples() {
        assert_eq!(run_plain(&b("1111"), 8), halt(0, 1));
        assert_eq!(run_plain(&b("1000110"), 8), halt(2, 2));
        assert_eq!(run_plain(&b("1000100101"), 16), RunOutcome::StepLimit);
        assert_eq!(run_plain(&b("0000"), 8), RunOutcome::Invalid);
        assert_eq!(run_plain(&b("1"), 0), halt(0, 0));
        assert_eq!(run_plain(&b("1111"), 0), RunOutcome::StepLimit);
    }

    #[test]
    fn loop_and_tape_semantics() {
        // INC INC [ DEC RIGHT INC LEFT ] RIGHT: moves 2 into cell 1. The
        // back-jump lands past `[`, so the second pass costs 5 steps.
        let prog = "1 000 000 100 001 010 000 011 101 010".replace(' ', "");
        assert_eq!(run_plain(&b(&prog), 100), halt(0, 2 + 6 + 5 + 1));
        assert_eq!(run_plain(&b(&prog), 13), RunOutcome::StepLimit);
        // LEFT at cell 0 stays put, DEC at 0 stays 0
        assert_eq!(run_plain(&b("1011001000"), 10), halt(1, 3));
    }

    #[test]
    fn doubling_past_machine_word_is_exact() {
        // INC, then 70 doublings
        let mut prog = String::from("1000");
        for _ in 0..70 {
            prog.push_str("110");
        }
        match run_plain(&b(&prog), 1000) {
            RunOutcome::Halt { output, steps } => {
                assert_eq!(output, BigUint::from(1u8) << 70u32);
                assert_eq!(steps, 71);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn elias_examples() {
        assert_eq!(elias_encode(0), b("1"));
        assert_eq!(elias_encode(1), b("010"));
        assert_eq!(elias_encode(4), b("00101"));
        assert_eq!(elias_decode(&b("1")), Ok((0, 1)));
        assert_eq!(elias_decode(&b("0101")), Ok((1, 3)));
        assert_eq!(elias_decode(&b("01")), Err(InvalidHeader));
        assert_eq!(elias_decode(&b("")), Err(InvalidHeader));
        for l in 0..100 {
            assert_eq!(elias_encode(l).len(), elias_len(l));
        }
    }

    #[test]
    fn elias_roundtrip_range() {
        let suffix = b("0110");
        for l in (0..=1_000_000u64).step_by(997).chain([1_000_000]) {
            let enc = elias_encode(l);
            let (got, used) = elias_decode(&enc.concat(&suffix)).unwrap();
            assert_eq!((got, used), (l, enc.len()));
        }
    }

    #[test]
    fn run_prefix_examples() {
        assert_eq!(run_prefix(&b("0101"), 4), halt(0, 0));
        assert_eq!(run_prefix(&b("1"), 8), RunOutcome::Invalid);
        assert_eq!(run_prefix(&b("010111"), 8), RunOutcome::Invalid);
        assert_eq!(run_prefix(&b("010"), 8), RunOutcome::Invalid);
    }

    #[test]
    fn prefix_syntax_examples() {
        let show = |v: Vec<BitString>| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(show(enumerate_prefix_syntax(1)), ["1"]);
        assert_eq!(show(enumerate_prefix_syntax(3)), ["1"]);
        assert_eq!(show(enumerate_prefix_syntax(4)), ["1", "0100", "0101"]);
    }
}
