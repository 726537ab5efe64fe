//! Text to semantic point: strip markup, keep plain word tokens, reduce
//! each to a root, weight by rarity band, spread the weight over the
//! root's meaning groups, and normalize by token count so repeating a text
//! does not move its point.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;

use crate::hash::fnv1a64;
use crate::point::SparsePoint;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// The semantic space: one dimension per meaning group.
pub const SEMANTIC_DIM: u32 = 1024;
/// Words fall into this many equal-frequency rarity bands.
pub const FREQUENCY_BANDS: u32 = 256;
/// Band assigned to words the lexicon does not know.
pub const DEFAULT_BAND: u8 = 128;

/// Stemming exceptions always present, whatever the lexicon file adds.
const SEED_EXCEPTIONS: &[&str] = &["was", "is", "this", "his", "its", "news"];

#[derive(Debug)]
pub struct LexiconError {
    pub line: usize,
    pub kind: LexiconErrorKind,
}

#[derive(Debug, PartialEq, Eq)]
pub enum LexiconErrorKind {
    MissingField,
    BadBand(String),
    BadGroup(String),
    GroupOutOfRange(u32),
    EmptyGroups,
}

impl fmt::Display for LexiconError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match &self.kind {
            LexiconErrorKind::MissingField => "expected root<TAB>band<TAB>groups".to_string(),
            LexiconErrorKind::BadBand(tok) => format!("bad band `{tok}` (0..=255)"),
            LexiconErrorKind::BadGroup(tok) => format!("bad group id `{tok}`"),
            LexiconErrorKind::GroupOutOfRange(g) => {
                format!("group id {g} out of range 0..{SEMANTIC_DIM}")
            }
            LexiconErrorKind::EmptyGroups => "meaning group list is empty".to_string(),
        };
        write!(f, "lexicon line {}: {}", self.line, what)
    }
}

impl std::error::Error for LexiconError {}

#[derive(Debug)]
struct LexEntry {
    band: u8,
    groups: Vec<u16>,
}

/// Word knowledge: rarity bands and meaning groups per root, plus the
/// stemming exception list. Lookup is total — unknown roots hash to a
/// single group and take the middle band — so the pipeline never stalls on
/// vocabulary gaps.
#[derive(Debug)]
pub struct Lexicon {
    entries: HashMap<String, LexEntry>,
    exceptions: HashSet<String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::empty()
    }
}

impl Lexicon {
    /// A lexicon with no entries: every root resolves through the hash
    /// fallback.
    pub fn empty() -> Self {
        Lexicon {
            entries: HashMap::new(),
            exceptions: SEED_EXCEPTIONS.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Loads a lexicon file: one `root<TAB>band<TAB>group,group,...` entry
    /// per line, `!word` lines extend the stemming exception list, `#`
    /// starts a comment, blank lines are skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, LexiconError> {
        let mut lex = Self::empty();
        for (no, line) in reader.lines().enumerate() {
            let line_no = no + 1;
            let line = line.map_err(|_| LexiconError {
                line: line_no,
                kind: LexiconErrorKind::MissingField,
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(word) = line.strip_prefix('!') {
                lex.exceptions.insert(word.trim().to_lowercase());
                continue;
            }
            let mut fields = line.split('\t');
            let (root, band, groups) = match (fields.next(), fields.next(), fields.next()) {
                (Some(r), Some(b), Some(g)) => (r, b, g),
                _ => return Err(LexiconError { line: line_no, kind: LexiconErrorKind::MissingField }),
            };
            let band: u8 = band.trim().parse().map_err(|_| LexiconError {
                line: line_no,
                kind: LexiconErrorKind::BadBand(band.to_string()),
            })?;
            let mut parsed = Vec::new();
            for g in groups.split(',') {
                let g = g.trim();
                if g.is_empty() {
                    continue;
                }
                let id: u32 = g.parse().map_err(|_| LexiconError {
                    line: line_no,
                    kind: LexiconErrorKind::BadGroup(g.to_string()),
                })?;
                if id >= SEMANTIC_DIM {
                    return Err(LexiconError {
                        line: line_no,
                        kind: LexiconErrorKind::GroupOutOfRange(id),
                    });
                }
                parsed.push(id as u16);
            }
            if parsed.is_empty() {
                return Err(LexiconError { line: line_no, kind: LexiconErrorKind::EmptyGroups });
            }
            parsed.sort_unstable();
            parsed.dedup();
            lex.entries
                .insert(root.trim().to_lowercase(), LexEntry { band, groups: parsed });
        }
        Ok(lex)
    }

    /// Reduces a token to its root: the longest of `-ing`, `-ed`, `-s` is
    /// stripped unless the word is a known exception or too short to lose
    /// the suffix.
    pub fn stem<'a>(&self, token: &'a str) -> &'a str {
        if self.exceptions.contains(token) {
            return token;
        }
        for suffix in ["ing", "ed", "s"] {
            if let Some(root) = token.strip_suffix(suffix) {
                if root.chars().count() >= 2 {
                    return root;
                }
            }
        }
        token
    }

    /// Band and meaning groups for a root; unknown roots take the default
    /// band and one hash-derived group.
    pub fn lookup(&self, root: &str) -> (u8, Groups<'_>) {
        match self.entries.get(root) {
            Some(entry) => (entry.band, Groups::Known(&entry.groups)),
            None => {
                let g = (fnv1a64(root.as_bytes()) % u64::from(SEMANTIC_DIM)) as u16;
                (DEFAULT_BAND, Groups::Hashed([g]))
            }
        }
    }

    /// Maps a plain text to its semantic point.
    ///
    /// Each token contributes its band weight `(band + 1) / 256`, split
    /// evenly across its meaning groups so a polysemous word carries no
    /// extra mass, and the whole point is divided by the token count.
    /// Accumulation runs over roots in sorted order, so any permutation of
    /// the same tokens produces the identical point bit for bit.
    pub fn vectorize(&self, text: &str) -> SparsePoint {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return SparsePoint::empty();
        }
        let total = tokens.len() as f64;
        let mut root_counts: BTreeMap<&str, u64> = BTreeMap::new();
        for token in &tokens {
            *root_counts.entry(self.stem(token)).or_insert(0) += 1;
        }
        let mut coords: BTreeMap<u16, f64> = BTreeMap::new();
        for (root, count) in root_counts {
            let (band, groups) = self.lookup(root);
            let weight = f64::from(u32::from(band) + 1) / f64::from(FREQUENCY_BANDS);
            let share = weight / groups.as_slice().len() as f64;
            for &g in groups.as_slice() {
                *coords.entry(g).or_insert(0.0) += count as f64 * share;
            }
        }
        let keys: Vec<u32> = coords.keys().map(|&k| u32::from(k)).collect();
        let vals: Vec<f64> = coords.values().map(|&v| v / total).collect();
        crate::point::SparseVector::<f64>::from_sorted_unchecked(keys, vals).quantized()
    }

    /// Vectorizes many documents; fans out across threads when the
    /// `parallel` feature is on.
    pub fn vectorize_batch<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Vec<SparsePoint> {
        #[cfg(feature = "parallel")]
        {
            texts.par_iter().map(|t| self.vectorize(t.as_ref())).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            texts.iter().map(|t| self.vectorize(t.as_ref())).collect()
        }
    }
}

/// Group list borrowed from the lexicon or synthesized for unknown roots.
pub enum Groups<'a> {
    Known(&'a [u16]),
    Hashed([u16; 1]),
}

impl Groups<'_> {
    pub fn as_slice(&self) -> &[u16] {
        match self {
            Groups::Known(s) => s,
            Groups::Hashed(a) => a,
        }
    }
}

/// Drops tag spans and script/style contents, then decodes the five basic
/// entities. Text without markup passes through unchanged.
pub fn strip_markup(input: &str) -> String {
    let bytes = input.as_bytes();
    let mut out = String::with_capacity(input.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'<' {
            let rest = &input[i + 1..];
            let name: String = rest
                .chars()
                .take_while(|c| c.is_ascii_alphabetic())
                .flat_map(|c| c.to_lowercase())
                .collect();
            if name == "script" || name == "style" {
                let closer = format!("</{name}");
                let hay = input[i..].to_lowercase();
                match hay.find(&closer) {
                    Some(at) => {
                        let after = i + at + closer.len();
                        match input[after..].find('>') {
                            Some(gt) => i = after + gt + 1,
                            None => break,
                        }
                    }
                    None => break,
                }
                continue;
            }
            match input[i..].find('>') {
                Some(gt) => i += gt + 1,
                None => break, // unclosed tag: best effort, drop the rest
            }
            continue;
        }
        if bytes[i] == b'&' {
            let entities = [
                ("&amp;", '&'),
                ("&lt;", '<'),
                ("&gt;", '>'),
                ("&quot;", '"'),
                ("&apos;", '\''),
            ];
            if let Some((text, ch)) = entities.iter().find(|(e, _)| input[i..].starts_with(e)) {
                out.push(*ch);
                i += text.len();
                continue;
            }
        }
        let ch = input[i..].chars().next().expect("in-bounds index");
        out.push(ch);
        i += ch.len_utf8();
    }
    out
}

/// Splits text into lowercase purely-alphabetic tokens. Surrounding
/// punctuation is trimmed; anything left with digits, `@`, `://`, or
/// punctuation inside is dropped whole — numbers, addresses, and
/// identifiers carry no meaning here.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
            if trimmed.is_empty() || !trimmed.chars().all(char::is_alphabetic) {
                return None;
            }
            Some(trimmed.to_lowercase())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strip_markup_examples() {
        assert_eq!(strip_markup("<b>hello</b> world"), "hello world");
        assert_eq!(strip_markup("a &amp; b"), "a & b");
        assert_eq!(strip_markup("no tags  at all"), "no tags  at all");
        assert_eq!(strip_markup("x<script>var a = '<p>';</script>y"), "xy");
        assert_eq!(strip_markup("x<style>p { color: red }</style>y"), "xy");
        assert_eq!(strip_markup("broken <tag"), "broken ");
        assert_eq!(strip_markup("&lt;kept&gt; &quot;q&quot; &apos;a&apos;"), "<kept> \"q\" 'a'");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("Send 2 mails to bob@x.com today"),
            vec!["send", "mails", "to", "today"]
        );
        assert!(tokenize("").is_empty());
        assert!(tokenize("re-use").is_empty());
        assert_eq!(tokenize("Hello, world!"), vec!["hello", "world"]);
        assert!(tokenize("http://example.org").is_empty());
    }

    #[test]
    fn stem_examples() {
        let lex = Lexicon::empty();
        assert_eq!(lex.stem("walking"), "walk");
        assert_eq!(lex.stem("was"), "was");
        assert_eq!(lex.stem("as"), "as");
        assert_eq!(lex.stem("played"), "play");
        assert_eq!(lex.stem("cats"), "cat");
        assert_eq!(lex.stem("news"), "news");
    }

    fn sample_lexicon() -> Lexicon {
        let text = "walk\t10\t3,7\nrun\t200\t3\ncat\t90\t500\n!fixedword\n# comment\n";
        Lexicon::from_reader(text.as_bytes()).unwrap()
    }

    #[test]
    fn lexicon_parses_and_falls_back() {
        let lex = sample_lexicon();
        let (band, groups) = lex.lookup("walk");
        assert_eq!(band, 10);
        assert_eq!(groups.as_slice(), &[3, 7]);

        let (band, groups) = lex.lookup("unknownroot");
        assert_eq!(band, DEFAULT_BAND);
        assert_eq!(groups.as_slice().len(), 1);
        assert!(u32::from(groups.as_slice()[0]) < SEMANTIC_DIM);

        assert_eq!(lex.stem("fixedwords"), "fixedword");
        assert_eq!(lex.stem("fixedword"), "fixedword");
    }

    #[test]
    fn lexicon_rejects_bad_lines() {
        assert!(matches!(
            Lexicon::from_reader("walk\t10".as_bytes()).unwrap_err().kind,
            LexiconErrorKind::MissingField
        ));
        assert!(matches!(
            Lexicon::from_reader("walk\t999\t1".as_bytes()).unwrap_err().kind,
            LexiconErrorKind::BadBand(_)
        ));
        assert!(matches!(
            Lexicon::from_reader("walk\t10\t2000".as_bytes()).unwrap_err().kind,
            LexiconErrorKind::GroupOutOfRange(2000)
        ));
        assert!(matches!(
            Lexicon::from_reader("walk\t10\t,".as_bytes()).unwrap_err().kind,
            LexiconErrorKind::EmptyGroups
        ));
    }

    #[test]
    fn vectorize_empty_text_is_the_empty_point() {
        assert!(Lexicon::empty().vectorize("").is_empty());
        assert!(Lexicon::empty().vectorize("42 1999 3.14").is_empty());
    }

    #[test]
    fn single_known_word_lands_on_its_group() {
        let lex = sample_lexicon();
        let p = lex.vectorize("run");
        assert_eq!(p.nnz(), 1);
        // One token, one group: the coordinate is the full band weight.
        let want = (200.0 + 1.0) / 256.0;
        assert!((f64::from(p.get(3)) - want).abs() < 1e-7);
    }

    #[test]
    fn polysemous_weight_splits_across_groups() {
        let lex = sample_lexicon();
        let p = lex.vectorize("walk");
        let each = (10.0 + 1.0) / 256.0 / 2.0;
        assert!((f64::from(p.get(3)) - each).abs() < 1e-7);
        assert!((f64::from(p.get(7)) - each).abs() < 1e-7);
    }

    #[test]
    fn repetition_leaves_the_point_in_place() {
        let lex = sample_lexicon();
        let text = "the cat was walking while the dog ran across town";
        let once = lex.vectorize(text);
        for m in [2usize, 3, 5] {
            let repeated = vec![text; m].join(" ");
            let p = lex.vectorize(&repeated);
            assert_eq!(p.nnz(), once.nnz());
            for (k, v) in once.iter() {
                let diff = (f64::from(p.get(k)) - f64::from(v)).abs();
                assert!(diff <= 1e-6 * (1.0 + f64::from(v).abs()), "m={m} coord {k}");
            }
        }
    }

    #[test]
    fn sentence_order_does_not_change_the_point_at_all() {
        let lex = sample_lexicon();
        let a = lex.vectorize("cats walk home. dogs run fast.");
        let b = lex.vectorize("dogs run fast. cats walk home.");
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn coordinates_stay_in_band_range(words in proptest::collection::vec("[a-z]{2,8}", 1..40)) {
            let lex = Lexicon::empty();
            let p = lex.vectorize(&words.join(" "));
            for (_, v) in p.iter() {
                prop_assert!(v > 0.0);
                prop_assert!(f64::from(v) <= 1.0 + 1e-9);
            }
        }

        #[test]
        fn token_permutation_is_exactly_invariant(
            words in proptest::collection::vec("[a-z]{2,6}", 1..30),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let lex = Lexicon::empty();
            let mut shuffled = words.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(
                lex.vectorize(&words.join(" ")),
                lex.vectorize(&shuffled.join(" "))
            );
        }
    }
}
