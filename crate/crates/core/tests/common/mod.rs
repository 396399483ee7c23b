//! Helpers shared by the acceptance suite: a reproducible mixed-language
//! text corpus and an independent dense solver used as a decoding oracle.

use perseus_core::{BitStream, PuncturedCode};
use rand::Rng;

const ENGLISH: &[&str] = &[
    "the", "of", "and", "to", "in", "is", "was", "that", "for", "with", "his", "on", "be", "at",
    "by", "had", "not", "are", "but", "from", "or", "have", "they", "which", "one", "you", "were",
    "all", "she", "there", "would", "their", "been", "when", "who", "will", "more", "said",
    "about", "time",
];
const FRENCH: &[&str] = &[
    "le", "la", "les", "de", "des", "un", "une", "et", "en", "que", "qui", "dans", "pour", "pas",
    "sur", "plus", "par", "avec", "tout", "fait", "être", "sont", "mais", "nous", "comme", "ou",
    "si", "leur", "bien", "sans", "peut", "dont", "aussi", "cette", "faire", "elle", "deux",
    "même", "autre", "après",
];
const GERMAN: &[&str] = &[
    "der", "die", "das", "und", "in", "den", "von", "zu", "mit", "sich", "des", "auf", "für",
    "ist", "im", "dem", "nicht", "ein", "eine", "als", "auch", "es", "an", "werden", "aus", "er",
    "hat", "dass", "sie", "nach", "wird", "bei", "einer", "um", "am", "sind", "noch", "wie",
    "über", "einem",
];
const SPANISH: &[&str] = &[
    "el", "la", "de", "que", "y", "en", "un", "los", "se", "del", "las", "por", "con", "para",
    "una", "su", "al", "es", "lo", "como", "más", "pero", "sus", "le", "ha", "este", "porque",
    "esta", "son", "entre", "cuando", "muy", "sin", "sobre", "también", "hasta", "donde", "quien",
    "desde", "todos",
];
const ITALIAN: &[&str] = &[
    "il", "di", "che", "la", "e", "in", "un", "per", "una", "non", "sono", "con", "si", "da",
    "come", "le", "dei", "nel", "alla", "più", "anche", "lui", "questo", "ma", "ha", "della",
    "suo", "era", "quando", "loro", "essere", "due", "tutto", "fatto", "dove", "così", "molto",
    "senza", "degli", "prima",
];
const LANGUAGES: &[&[&str]] = &[ENGLISH, FRENCH, GERMAN, SPANISH, ITALIAN];

/// Draws a rank with density roughly proportional to 1/(rank+1), so a few
/// words dominate the way they do in natural text.
fn zipf_rank<R: Rng + ?Sized>(rng: &mut R, len: usize) -> usize {
    let r = (len as f64 + 1.0).powf(rng.gen::<f64>()) as usize;
    r.saturating_sub(1).min(len - 1)
}

/// Builds at least `target_bytes` of sentence-shaped text, mixing languages
/// per sentence. The letter statistics land near natural prose, which is
/// what the entropy-trend check needs as its low-entropy baseline.
pub fn mixed_language_corpus<R: Rng + ?Sized>(rng: &mut R, target_bytes: usize) -> Vec<u8> {
    let mut out = String::with_capacity(target_bytes + 256);
    while out.len() < target_bytes {
        let words = LANGUAGES[rng.gen_range(0..LANGUAGES.len())];
        let count = rng.gen_range(6..=14);
        for w in 0..count {
            let word = words[zipf_rank(rng, words.len())];
            if w == 0 {
                let mut chars = word.chars();
                let first = chars.next().expect("words are non-empty");
                out.extend(first.to_uppercase());
                out.push_str(chars.as_str());
            } else {
                out.push(' ');
                out.push_str(word);
            }
        }
        if rng.gen_bool(1.0 / 6.0) {
            out.push_str(".\n");
        } else {
            out.push_str(". ");
        }
    }
    out.into_bytes()
}

/// Outcome of the dense reference solver.
pub enum DenseOutcome {
    Unique(BitStream),
    Deficit(usize),
}

/// Textbook dense Gaussian elimination over the code's generator matrix,
/// built column by column by encoding unit messages. Quadratic and slow,
/// but independent of the banded solver's windowing arithmetic, which is
/// the point: the two must agree bit for bit.
///
/// `received` is the punctured (kept-positions-only) stream; it must be
/// consistent, i.e. produced by an actual encoding.
pub fn dense_reference_solve(
    pc: &PuncturedCode,
    received: &BitStream,
    msg_bits: usize,
) -> DenseOutcome {
    let rows = received.len();
    let words = (msg_bits + 1).div_ceil(64);
    let aug = msg_bits; // augmented column holding the received bit
    let bit = |row: &[u64], c: usize| row[c / 64] >> (c % 64) & 1 == 1;

    let mut mat = vec![vec![0u64; words]; rows];
    for u in 0..msg_bits {
        let mut unit = BitStream::zeros(msg_bits);
        unit.set(u, true);
        let column = pc.puncture(&pc.base().encode(&unit).expect("unit message encodes"));
        assert_eq!(column.len(), rows, "generator column height mismatch");
        for (r, one) in column.iter().enumerate() {
            if one {
                mat[r][u / 64] |= 1 << (u % 64);
            }
        }
    }
    for r in 0..rows {
        if received.get(r) {
            mat[r][aug / 64] |= 1 << (aug % 64);
        }
    }

    // Reduce to RREF; record which column each pivot row solves.
    let mut pivot_cols = Vec::new();
    for c in 0..msg_bits {
        let rank = pivot_cols.len();
        let Some(pr) = (rank..rows).find(|&r| bit(&mat[r], c)) else {
            continue;
        };
        mat.swap(rank, pr);
        let pivot_row = mat[rank].clone();
        for (r, row) in mat.iter_mut().enumerate() {
            if r != rank && bit(row, c) {
                for (w, p) in row.iter_mut().zip(&pivot_row) {
                    *w ^= p;
                }
            }
        }
        pivot_cols.push(c);
    }
    for row in &mat[pivot_cols.len()..] {
        assert!(
            row.iter().all(|&w| w == 0),
            "inconsistent system on noise-free input"
        );
    }

    if pivot_cols.len() < msg_bits {
        return DenseOutcome::Deficit(msg_bits - pivot_cols.len());
    }
    let mut message = BitStream::zeros(msg_bits);
    for (r, &c) in pivot_cols.iter().enumerate() {
        message.set(c, bit(&mat[r], aug));
    }
    DenseOutcome::Unique(message)
}
