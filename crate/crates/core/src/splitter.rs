//! Splitting valid examples on dividing substrings.
//!
//! A dividing substring occurs the same number of times, in the same order,
//! in every valid example. Splitting before and after each occurrence turns
//! every example into a tuple of fields that can be synthesized separately.

/// One position of the split tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Column {
    /// Occurrence of a divider; the same text in every example.
    Divider(String),
    /// Text between dividers, one entry per valid example.
    Field(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitResult {
    pub columns: Vec<Column>,
    /// Distinct dividers in order of first use.
    pub dividers: Vec<String>,
}

impl SplitResult {
    pub fn n(&self) -> usize {
        self.columns.len()
    }

    /// The tuple for the `i`-th example.
    pub fn fields(&self, i: usize) -> Vec<String> {
        self.columns
            .iter()
            .map(|c| match c {
                Column::Divider(d) => d.clone(),
                Column::Field(values) => values[i].clone(),
            })
            .collect()
    }

    pub fn has_dividers(&self) -> bool {
        !self.dividers.is_empty()
    }
}

/// Occurrences found by scanning left to right, trying longer dividers
/// first at each position. Returns `(start, divider index)` pairs over char
/// positions.
fn scan(chars: &[char], dividers: &[Vec<char>]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..dividers.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(dividers[i].len()));
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        match order.iter().find(|&&d| chars[i..].starts_with(&dividers[d])) {
            Some(&d) => {
                out.push((i, d));
                i += dividers[d].len();
            }
            None => i += 1,
        }
    }
    out
}

/// Whether `dividers` occur identically in every example, and each of them
/// at least once.
fn consistent(examples: &[Vec<char>], dividers: &[Vec<char>]) -> bool {
    let mut reference: Option<Vec<usize>> = None;
    for ex in examples {
        let seq: Vec<usize> = scan(ex, dividers).into_iter().map(|(_, d)| d).collect();
        match &reference {
            None => {
                if (0..dividers.len()).any(|d| !seq.contains(&d)) {
                    return false;
                }
                reference = Some(seq);
            }
            Some(r) if *r != seq => return false,
            Some(_) => {}
        }
    }
    true
}

/// Dividing substrings of `valid`, chosen greedily: longer candidates first,
/// then the one giving fewer fields, then leftmost, then lexicographically
/// smallest. A candidate is kept if, together with those already kept, it
/// still occurs identically in all examples.
///
/// With a single valid example every substring divides trivially, so only
/// candidates made of non-alphanumeric characters or occurring in some
/// invalid example are considered.
pub fn find_dividing_substrings(valid: &[String], invalid: &[String]) -> Vec<String> {
    let examples: Vec<Vec<char>> = valid.iter().map(|s| s.chars().collect()).collect();
    let Some(shortest) = examples.iter().min_by_key(|e| e.len()) else {
        return Vec::new();
    };
    let mut candidates: Vec<(Vec<char>, usize)> = Vec::new();
    for start in 0..shortest.len() {
        for end in start + 1..=shortest.len() {
            let sub = shortest[start..end].to_vec();
            if !candidates.iter().any(|(c, _)| *c == sub) {
                candidates.push((sub, start));
            }
        }
    }
    if valid.len() == 1 {
        candidates.retain(|(c, _)| {
            let text: String = c.iter().collect();
            c.iter().all(|ch| !ch.is_alphanumeric()) || invalid.iter().any(|s| s.contains(&text))
        });
    }
    let count_in = |c: &[char]| scan(&examples[0], &[c.to_vec()]).len();
    candidates.sort_by(|(a, sa), (b, sb)| {
        b.len().cmp(&a.len()).then(count_in(a).cmp(&count_in(b))).then(sa.cmp(sb)).then(a.cmp(b))
    });

    let mut chosen: Vec<Vec<char>> = Vec::new();
    for (cand, _) in candidates {
        chosen.push(cand);
        if !consistent(&examples, &chosen) {
            chosen.pop();
        }
    }
    // Order by first occurrence in the first example.
    let first = scan(&examples[0], &chosen);
    let mut ordered: Vec<String> = Vec::new();
    for (_, d) in first {
        let s: String = chosen[d].iter().collect();
        if !ordered.contains(&s) {
            ordered.push(s);
        }
    }
    ordered
}

/// Splits the valid examples on their dividing substrings. Field columns that
/// are empty in every example are dropped. Without dividers the result has a
/// single field column holding the examples.
pub fn split(valid: &[String], invalid: &[String]) -> SplitResult {
    let dividers = find_dividing_substrings(valid, invalid);
    if dividers.is_empty() {
        return SplitResult { columns: vec![Column::Field(valid.to_vec())], dividers };
    }
    let divs: Vec<Vec<char>> = dividers.iter().map(|d| d.chars().collect()).collect();
    let mut per_example: Vec<Vec<String>> = Vec::new();
    let mut layout: Vec<Option<usize>> = Vec::new();
    for (i, ex) in valid.iter().enumerate() {
        let chars: Vec<char> = ex.chars().collect();
        let mut parts = Vec::new();
        let mut kinds = Vec::new();
        let mut pos = 0;
        for (start, d) in scan(&chars, &divs) {
            parts.push(chars[pos..start].iter().collect());
            kinds.push(None);
            parts.push(dividers[d].clone());
            kinds.push(Some(d));
            pos = start + divs[d].len();
        }
        parts.push(chars[pos..].iter().collect());
        kinds.push(None);
        if i == 0 {
            layout = kinds;
        }
        per_example.push(parts);
    }
    let mut columns = Vec::new();
    for (j, kind) in layout.iter().enumerate() {
        match kind {
            Some(d) => columns.push(Column::Divider(dividers[*d].clone())),
            None => {
                let values: Vec<String> = per_example.iter().map(|p| p[j].clone()).collect();
                if values.iter().any(|v| !v.is_empty()) {
                    columns.push(Column::Field(values));
                }
            }
        }
    }
    SplitResult { columns, dividers }
}
