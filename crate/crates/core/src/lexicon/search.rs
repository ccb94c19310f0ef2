use std::collections::BTreeSet;

use serde::Serialize;

use super::{fold_case, LexicalType, Lexicon, LexiconError, Synset, SynsetId};

/// Per-query cap on returned synsets used by the service.
pub const DEFAULT_SEARCH_LIMIT: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SynsetGroup {
    pub lexical_type: LexicalType,
    pub synsets: Vec<Synset>,
}

/// Search hits grouped noun, adjective, verb, adverb; empty groups omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResultPage {
    pub groups: Vec<SynsetGroup>,
    pub truncated: bool,
    pub total_matches: usize,
}

impl SearchResultPage {
    pub fn ids(&self) -> impl Iterator<Item = SynsetId> + '_ {
        self.groups.iter().flat_map(|g| g.synsets.iter().map(Synset::id))
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(|g| g.synsets.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Trims, lowercases and turns each run of internal whitespace into a single
/// underscore. Returns `None` for a blank query.
pub fn normalize_query(query: &str) -> Option<String> {
    let trimmed = query.trim();
    if trimmed.is_empty() {
        return None;
    }
    let joined = trimmed.split_whitespace().collect::<Vec<_>>().join("_");
    Some(fold_case(&joined))
}

/// Whether a normalized query matches a lemma: some suffix of the lowercased
/// lemma that begins at a token boundary starts with the query. For a query
/// without underscores this is exactly "some token starts with the query".
pub fn query_matches_lemma(normalized: &str, lemma: &str) -> bool {
    let lemma = fold_case(lemma);
    if lemma.starts_with(normalized) {
        return true;
    }
    lemma
        .match_indices('_')
        .any(|(i, _)| lemma[i + 1..].starts_with(normalized))
}

impl Lexicon {
    /// Keyword search over lemma tokens. At most `limit` synsets are
    /// returned; pass `usize::MAX` for an unbounded search.
    pub fn search(&self, query: &str, limit: usize) -> Result<SearchResultPage, LexiconError> {
        let normalized = normalize_query(query).ok_or(LexiconError::EmptyQuery)?;
        if limit == 0 {
            return Err(LexiconError::InvalidLimit);
        }

        let first_token = normalized.split('_').next().unwrap_or_default();
        let mut hits: Vec<&Synset> = if first_token.is_empty() {
            self.synsets()
                .filter(|s| s.lemmas().iter().any(|l| query_matches_lemma(&normalized, l)))
                .collect()
        } else {
            let candidates: BTreeSet<SynsetId> = self
                .lemma_index
                .range::<str, _>((std::ops::Bound::Included(first_token), std::ops::Bound::Unbounded))
                .take_while(|(token, _)| token.starts_with(first_token))
                .flat_map(|(_, ids)| ids.iter().copied())
                .collect();
            let exact = first_token.len() == normalized.len();
            candidates
                .into_iter()
                .map(|id| &self.synsets[&id])
                .filter(|s| exact || s.lemmas().iter().any(|l| query_matches_lemma(&normalized, l)))
                .collect()
        };

        hits.sort_by_cached_key(|s| (s.lexical_type().search_rank(), s.sort_key()));
        let total_matches = hits.len();
        let truncated = total_matches > limit;
        hits.truncate(limit);

        let mut groups: Vec<SynsetGroup> = Vec::new();
        for synset in hits {
            match groups.last_mut() {
                Some(group) if group.lexical_type == synset.lexical_type() => {
                    group.synsets.push(synset.clone())
                }
                _ => groups.push(SynsetGroup {
                    lexical_type: synset.lexical_type(),
                    synsets: vec![synset.clone()],
                }),
            }
        }
        Ok(SearchResultPage {
            groups,
            truncated,
            total_matches,
        })
    }
}
