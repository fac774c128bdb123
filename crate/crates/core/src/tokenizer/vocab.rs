use std::collections::HashMap;

pub type TokenId = u32;

pub const UNK_ID: TokenId = 0;
pub const BOS_ID: TokenId = 1;
pub const EOS_ID: TokenId = 2;
pub const NUM_SPECIAL: TokenId = 3;
/// Byte `b` is token `b + BYTE_OFFSET`, so the three-byte lead 0xE0 is token 227.
pub const BYTE_OFFSET: TokenId = NUM_SPECIAL;
pub const FIRST_LEARNED_ID: TokenId = BYTE_OFFSET + 256;

#[inline]
pub fn byte_id(b: u8) -> TokenId {
    b as TokenId + BYTE_OFFSET
}

/// Special tokens, the 256 byte tokens, and learned multi-byte tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ByteVocab {
    learned: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, TokenId>,
}

impl ByteVocab {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total number of ids, specials and byte tokens included.
    pub fn len(&self) -> usize {
        FIRST_LEARNED_ID as usize + self.learned.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn learned(&self) -> &[Vec<u8>] {
        &self.learned
    }

    pub fn id_of(&self, bytes: &[u8]) -> Option<TokenId> {
        match bytes {
            [] => None,
            [b] => Some(byte_id(*b)),
            _ => self.index.get(bytes).copied(),
        }
    }

    /// Byte string of `id`. Special tokens map to the empty string.
    pub fn bytes_of(&self, id: TokenId) -> Option<&[u8]> {
        static BYTES: [u8; 256] = {
            let mut t = [0u8; 256];
            let mut i = 0;
            while i < 256 {
                t[i] = i as u8;
                i += 1;
            }
            t
        };
        match id {
            0..NUM_SPECIAL => Some(&[]),
            NUM_SPECIAL..FIRST_LEARNED_ID => {
                let b = (id - BYTE_OFFSET) as usize;
                Some(&BYTES[b..b + 1])
            }
            _ => self
                .learned
                .get((id - FIRST_LEARNED_ID) as usize)
                .map(Vec::as_slice),
        }
    }

    /// Returns the id of `bytes`, adding it as a learned token if new.
    pub fn insert(&mut self, bytes: Vec<u8>) -> TokenId {
        debug_assert!(!bytes.is_empty());
        if let Some(id) = self.id_of(&bytes) {
            return id;
        }
        let id = FIRST_LEARNED_ID + self.learned.len() as TokenId;
        self.index.insert(bytes.clone(), id);
        self.learned.push(bytes);
        id
    }
}

/// Ordered merge rules; the rank of a rule is its position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeTable {
    pub merges: Vec<(Vec<u8>, Vec<u8>)>,
}

impl MergeTable {
    pub fn len(&self) -> usize {
        self.merges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.merges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Vec<u8>, Vec<u8>)> {
        self.merges.iter()
    }
}

/// Scored pieces of a unigram model. All 256 single bytes are always present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UnigramModel {
    pub pieces: Vec<(Vec<u8>, f64)>,
}

impl UnigramModel {
    pub fn score_of(&self, piece: &[u8]) -> Option<f64> {
        self.pieces.iter().find(|(p, _)| p == piece).map(|(_, s)| *s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_ids_biject() {
        let v = ByteVocab::new();
        for b in 0..=255u8 {
            let id = v.id_of(&[b]).unwrap();
            assert_eq!(id, b as u32 + 3);
            assert_eq!(v.bytes_of(id).unwrap(), &[b]);
        }
        assert_eq!(v.id_of(&[0xE0]), Some(227));
        assert_eq!(v.len(), 259);
    }

    #[test]
    fn insert_dedupes() {
        let mut v = ByteVocab::new();
        assert_eq!(v.insert(b"ab".to_vec()), 259);
        assert_eq!(v.insert(b"cd".to_vec()), 260);
        assert_eq!(v.insert(b"ab".to_vec()), 259);
        assert_eq!(v.insert(b"a".to_vec()), byte_id(b'a'));
        assert_eq!(v.len(), 261);
        assert_eq!(v.bytes_of(260).unwrap(), b"cd");
        assert_eq!(v.bytes_of(261), None);
        assert_eq!(v.bytes_of(BOS_ID).unwrap(), b"");
    }
}
