//! The envelope index: root children keyed by the 1-bit iSAX(L) word,
//! inner/leaf nodes refined one bit at a time, the flat max-cardinality
//! envelope list scanned by exact search, and binary persistence.

use std::collections::BTreeMap;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::series::{LengthRange, SeriesCollection};
use crate::summary::{
    build_envelope_norm, build_envelope_raw, BreakpointMode, Breakpoints, ISaxWord, PaaConfig,
    UEnvelope,
};

pub const INDEX_MAGIC: &[u8; 4] = b"ULSI";
pub const INDEX_VERSION: u8 = 1;
pub const DEFAULT_LEAF_CAPACITY: usize = 2000;
pub const DEFAULT_BREAKPOINT_SAMPLE: usize = 100_000;

/// Everything the index needs to summarize and route envelopes.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexConfig {
    pub paa: PaaConfig,
    pub range: LengthRange,
    pub gamma: usize,
    pub normalized: bool,
    pub leaf_capacity: usize,
    pub breakpoints: Breakpoints,
}

/// Build-time knobs; breakpoints default to Gaussian for normalized mode
/// and empirical quantiles for raw mode.
#[derive(Debug, Clone)]
pub struct IndexOptions {
    pub segment_len: usize,
    pub max_card_bits: u8,
    pub range: LengthRange,
    pub gamma: usize,
    pub normalized: bool,
    pub leaf_capacity: usize,
    pub breakpoint_mode: Option<BreakpointMode>,
    pub breakpoint_sample: usize,
    pub seed: u64,
}

impl IndexOptions {
    pub fn new(segment_len: usize, range: LengthRange, gamma: usize, normalized: bool) -> Self {
        IndexOptions {
            segment_len,
            max_card_bits: 8,
            range,
            gamma,
            normalized,
            leaf_capacity: DEFAULT_LEAF_CAPACITY,
            breakpoint_mode: None,
            breakpoint_sample: DEFAULT_BREAKPOINT_SAMPLE,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Inner {
        split_segment: usize,
        children: [Option<Box<IndexNode>>; 2],
    },
    Leaf {
        /// Positions into the flat envelope list, ascending (disk order).
        entries: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexNode {
    /// Routing key: the iSAX(L) shared by every descendant at this node's
    /// cardinality.
    pub lower_word: ISaxWord,
    /// Dominating word: per segment, the max descendant iSAX(U) symbol at
    /// the node's cardinality.
    pub upper_word: ISaxWord,
    /// Next round-robin segment to try on a split.
    pub split_hint: usize,
    pub kind: NodeKind,
}

#[derive(Debug)]
pub struct UlisseIndex {
    pub config: IndexConfig,
    pub collection: SeriesCollection,
    pub envelope_list: Vec<UEnvelope>,
    pub root: BTreeMap<Vec<u8>, IndexNode>,
    pub data_fingerprint: [u8; 32],
    pub data_ref: Option<PathBuf>,
}

/// Content fingerprint of a collection: series count, lengths and raw
/// values, hashed in storage order.
pub fn collection_digest(c: &SeriesCollection) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((c.series.len() as u64).to_le_bytes());
    for d in &c.series {
        h.update((d.len() as u64).to_le_bytes());
        for &v in &d.values {
            h.update((v as f32).to_le_bytes());
        }
    }
    h.finalize().into()
}

impl UlisseIndex {
    /// Total envelopes; the denominator of pruning power.
    pub fn envelope_count(&self) -> usize {
        self.envelope_list.len()
    }

    pub fn series_len(&self, id: u32) -> usize {
        self.collection.series[id as usize].len()
    }
}

/// Builds the index by inserting one envelope per stride of `gamma + 1`
/// offsets for every series, per the build options. Deterministic.
pub fn build_index(c: SeriesCollection, opts: &IndexOptions) -> Result<UlisseIndex> {
    if c.is_empty() {
        return Err(Error::Argument("cannot index an empty collection".into()));
    }
    let paa_cfg = PaaConfig::new(opts.segment_len, opts.range.l_max, opts.max_card_bits)?;
    if opts.segment_len > opts.range.l_min {
        return Err(Error::Argument(format!(
            "segment length {} exceeds l_min {}",
            opts.segment_len, opts.range.l_min
        )));
    }
    let mode = opts.breakpoint_mode.unwrap_or(if opts.normalized {
        BreakpointMode::Gaussian
    } else {
        BreakpointMode::Empirical
    });
    let breakpoints = match mode {
        BreakpointMode::Gaussian => Breakpoints::gaussian(opts.max_card_bits)?,
        BreakpointMode::Empirical => {
            Breakpoints::empirical(&c, &paa_cfg, opts.breakpoint_sample, opts.seed)?
        }
    };
    let config = IndexConfig {
        paa: paa_cfg,
        range: opts.range,
        gamma: opts.gamma,
        normalized: opts.normalized,
        leaf_capacity: opts.leaf_capacity.max(1),
        breakpoints,
    };

    let mut idx = UlisseIndex {
        data_fingerprint: collection_digest(&c),
        data_ref: c.source_path.clone(),
        config,
        collection: c,
        envelope_list: Vec::new(),
        root: BTreeMap::new(),
    };
    for sid in 0..idx.collection.series.len() {
        let mut a = 1usize;
        loop {
            let d = &idx.collection.series[sid];
            let built = if idx.config.normalized {
                build_envelope_norm(
                    d,
                    &idx.config.paa,
                    idx.config.range,
                    idx.config.gamma,
                    a,
                    &idx.config.breakpoints,
                )?
            } else {
                build_envelope_raw(
                    d,
                    &idx.config.paa,
                    idx.config.range,
                    idx.config.gamma,
                    a,
                    &idx.config.breakpoints,
                )?
            };
            let Some(env) = built else { break };
            let pos = idx.envelope_list.len();
            idx.envelope_list.push(env);
            insert_envelope(&mut idx, pos);
            a += idx.config.gamma + 1;
        }
    }
    Ok(idx)
}

fn root_key(e: &UEnvelope) -> Vec<u8> {
    let w = e.lower.len();
    e.lower.promote(&vec![1; w]).symbols
}

fn widen_upper(node: &mut IndexNode, e: &UEnvelope) {
    for k in 0..node.upper_word.len() {
        let sym = e.upper.symbol_at(k, node.upper_word.card_bits[k]);
        if sym > node.upper_word.symbols[k] {
            node.upper_word.symbols[k] = sym;
        }
    }
}

/// Routes envelope `pos` by its iSAX(L), widening iSAX(U) along the path,
/// splitting leaves that exceed capacity.
pub fn insert_envelope(idx: &mut UlisseIndex, pos: usize) {
    let e = &idx.envelope_list[pos];
    let key = root_key(e);
    let w = e.lower.len();
    let node = idx.root.entry(key.clone()).or_insert_with(|| IndexNode {
        lower_word: ISaxWord {
            symbols: key,
            card_bits: vec![1; w],
        },
        upper_word: ISaxWord {
            symbols: vec![0; w],
            card_bits: vec![1; w],
        },
        split_hint: 0,
        kind: NodeKind::Leaf {
            entries: Vec::new(),
        },
    });
    insert_into(node, pos, &idx.envelope_list, &idx.config);
}

fn insert_into(node: &mut IndexNode, pos: usize, list: &[UEnvelope], cfg: &IndexConfig) {
    widen_upper(node, &list[pos]);
    match &mut node.kind {
        NodeKind::Leaf { entries } => {
            entries.push(pos);
            if entries.len() > cfg.leaf_capacity {
                split_leaf(node, list, cfg);
            }
        }
        NodeKind::Inner {
            split_segment,
            children,
        } => {
            let z = *split_segment;
            let child_bits = node.lower_word.card_bits[z] + 1;
            let e = &list[pos];
            let bit = (e.lower.symbol_at(z, child_bits) & 1) as usize;
            let child = children[bit].get_or_insert_with(|| {
                let mut lw = node.lower_word.clone();
                lw.card_bits[z] = child_bits;
                lw.symbols[z] = e.lower.symbol_at(z, child_bits);
                let mut uw = lw.clone();
                uw.symbols = vec![0; lw.len()];
                Box::new(IndexNode {
                    lower_word: lw,
                    upper_word: uw,
                    split_hint: node.split_hint,
                    kind: NodeKind::Leaf {
                        entries: Vec::new(),
                    },
                })
            });
            insert_into(child, pos, list, cfg);
        }
    }
}

/// Turns an over-capacity leaf into an inner node whose two children refine
/// one segment by one bit. Round-robin segment choice starting at the
/// node's split hint; if every segment is already at max cardinality the
/// leaf stays (oversized leaves are permitted).
pub fn split_leaf(node: &mut IndexNode, list: &[UEnvelope], cfg: &IndexConfig) {
    let w = node.lower_word.len();
    let max_bits = cfg.paa.max_card_bits;
    let mut z = None;
    for step in 0..w {
        let k = (node.split_hint + step) % w;
        if node.lower_word.card_bits[k] < max_bits {
            z = Some(k);
            break;
        }
    }
    let Some(z) = z else { return };
    let NodeKind::Leaf { entries } = std::mem::replace(
        &mut node.kind,
        NodeKind::Inner {
            split_segment: z,
            children: [None, None],
        },
    ) else {
        unreachable!("split_leaf on inner node")
    };
    node.split_hint = (z + 1) % w;
    for pos in entries {
        insert_into(node, pos, list, cfg);
    }
}

/// Depth-first visitor over every node under the root table.
pub fn walk_nodes<'a>(idx: &'a UlisseIndex, mut f: impl FnMut(&'a IndexNode)) {
    fn rec<'a>(n: &'a IndexNode, f: &mut impl FnMut(&'a IndexNode)) {
        f(n);
        if let NodeKind::Inner { children, .. } = &n.kind {
            for c in children.iter().flatten() {
                rec(c, f);
            }
        }
    }
    for n in idx.root.values() {
        rec(n, &mut f);
    }
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

fn write_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_u8(r: &mut impl Read) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn write_word_symbols(w: &mut impl Write, word: &ISaxWord) -> Result<()> {
    w.write_all(&word.symbols)?;
    Ok(())
}

fn save_node(w: &mut impl Write, n: &IndexNode) -> Result<()> {
    match &n.kind {
        NodeKind::Leaf { .. } => w.write_all(&[0u8])?,
        NodeKind::Inner { .. } => w.write_all(&[1u8])?,
    }
    w.write_all(&n.lower_word.card_bits)?;
    w.write_all(&n.lower_word.symbols)?;
    w.write_all(&n.upper_word.symbols)?;
    write_u32(w, n.split_hint as u32)?;
    match &n.kind {
        NodeKind::Leaf { entries } => {
            write_u32(w, entries.len() as u32)?;
            for &p in entries {
                write_u32(w, p as u32)?;
            }
        }
        NodeKind::Inner {
            split_segment,
            children,
        } => {
            write_u32(w, *split_segment as u32)?;
            let mask = children[0].is_some() as u8 | ((children[1].is_some() as u8) << 1);
            w.write_all(&[mask])?;
            for c in children.iter().flatten() {
                save_node(w, c)?;
            }
        }
    }
    Ok(())
}

fn load_node(r: &mut impl Read, w_len: usize) -> Result<IndexNode> {
    let kind_tag = read_u8(r)?;
    let mut card_bits = vec![0u8; w_len];
    r.read_exact(&mut card_bits)?;
    let mut lo_sym = vec![0u8; w_len];
    r.read_exact(&mut lo_sym)?;
    let mut up_sym = vec![0u8; w_len];
    r.read_exact(&mut up_sym)?;
    let split_hint = read_u32(r)? as usize;
    let kind = match kind_tag {
        0 => {
            let n = read_u32(r)? as usize;
            let mut entries = Vec::with_capacity(n);
            for _ in 0..n {
                entries.push(read_u32(r)? as usize);
            }
            NodeKind::Leaf { entries }
        }
        1 => {
            let split_segment = read_u32(r)? as usize;
            let mask = read_u8(r)?;
            let mut children: [Option<Box<IndexNode>>; 2] = [None, None];
            for (bit, slot) in children.iter_mut().enumerate() {
                if mask & (1 << bit) != 0 {
                    *slot = Some(Box::new(load_node(r, w_len)?));
                }
            }
            NodeKind::Inner {
                split_segment,
                children,
            }
        }
        t => return Err(Error::Format(format!("unknown node tag {t}"))),
    };
    Ok(IndexNode {
        lower_word: ISaxWord {
            symbols: lo_sym,
            card_bits: card_bits.clone(),
        },
        upper_word: ISaxWord {
            symbols: up_sym,
            card_bits,
        },
        split_hint,
        kind,
    })
}

pub fn save_index(idx: &UlisseIndex, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(INDEX_MAGIC)?;
    w.write_all(&[INDEX_VERSION])?;
    let cfg = &idx.config;
    write_u32(&mut w, cfg.paa.segment_len as u32)?;
    write_u32(&mut w, cfg.paa.word_len as u32)?;
    w.write_all(&[cfg.paa.max_card_bits])?;
    write_u32(&mut w, cfg.range.l_min as u32)?;
    write_u32(&mut w, cfg.range.l_max as u32)?;
    write_u32(&mut w, cfg.gamma as u32)?;
    w.write_all(&[cfg.normalized as u8])?;
    write_u32(&mut w, cfg.leaf_capacity as u32)?;
    w.write_all(&[match cfg.breakpoints.mode {
        BreakpointMode::Gaussian => 0u8,
        BreakpointMode::Empirical => 1u8,
    }])?;
    let max_level = cfg.breakpoints.thresholds(cfg.paa.max_card_bits);
    write_u32(&mut w, max_level.len() as u32)?;
    for &t in max_level {
        w.write_all(&t.to_le_bytes())?;
    }
    w.write_all(&idx.data_fingerprint)?;

    write_u32(&mut w, idx.envelope_list.len() as u32)?;
    for e in &idx.envelope_list {
        write_u32(&mut w, e.series_id)?;
        write_u32(&mut w, e.start_offset)?;
        write_u32(&mut w, e.gamma)?;
        write_word_symbols(&mut w, &e.lower)?;
        write_word_symbols(&mut w, &e.upper)?;
        for &v in &e.lower_paa {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        for &v in &e.upper_paa {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    write_u32(&mut w, idx.root.len() as u32)?;
    for n in idx.root.values() {
        save_node(&mut w, n)?;
    }
    w.flush()?;
    Ok(())
}

/// Loads an index and its dataset; the dataset's content fingerprint must
/// match the one stored at build time.
pub fn load_index(path: &Path, data_path: &Path) -> Result<UlisseIndex> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != INDEX_MAGIC {
        return Err(Error::Format("bad index magic".into()));
    }
    let version = read_u8(&mut r)?;
    if version != INDEX_VERSION {
        return Err(Error::Version(version));
    }
    let segment_len = read_u32(&mut r)? as usize;
    let word_len = read_u32(&mut r)? as usize;
    let max_card_bits = read_u8(&mut r)?;
    let l_min = read_u32(&mut r)? as usize;
    let l_max = read_u32(&mut r)? as usize;
    let gamma = read_u32(&mut r)? as usize;
    let normalized = read_u8(&mut r)? != 0;
    let leaf_capacity = read_u32(&mut r)? as usize;
    let mode = match read_u8(&mut r)? {
        0 => BreakpointMode::Gaussian,
        1 => BreakpointMode::Empirical,
        m => return Err(Error::Format(format!("unknown breakpoint mode {m}"))),
    };
    let n_thr = read_u32(&mut r)? as usize;
    let mut max_level = Vec::with_capacity(n_thr);
    for _ in 0..n_thr {
        max_level.push(read_f64(&mut r)?);
    }
    let breakpoints = Breakpoints::from_max_level(mode, max_level, max_card_bits)?;
    let mut fingerprint = [0u8; 32];
    r.read_exact(&mut fingerprint)?;

    let collection = crate::series::load_collection(data_path).map_err(|e| match e {
        Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
            Error::Fingerprint(format!("dataset file {} not found", data_path.display()))
        }
        other => other,
    })?;
    let digest = collection_digest(&collection);
    if digest != fingerprint {
        return Err(Error::Fingerprint(format!(
            "dataset {} does not match the one the index was built from",
            data_path.display()
        )));
    }

    let paa = PaaConfig::new(segment_len, l_max, max_card_bits)?;
    if paa.word_len != word_len {
        return Err(Error::Format("inconsistent word length".into()));
    }
    let range = LengthRange::new(l_min, l_max)?;
    let config = IndexConfig {
        paa,
        range,
        gamma,
        normalized,
        leaf_capacity,
        breakpoints,
    };

    let n_env = read_u32(&mut r)? as usize;
    let mut envelope_list = Vec::with_capacity(n_env);
    for _ in 0..n_env {
        let series_id = read_u32(&mut r)?;
        let start_offset = read_u32(&mut r)?;
        let e_gamma = read_u32(&mut r)?;
        let mut lo_sym = vec![0u8; word_len];
        r.read_exact(&mut lo_sym)?;
        let mut up_sym = vec![0u8; word_len];
        r.read_exact(&mut up_sym)?;
        let read_reals = |r: &mut BufReader<std::fs::File>| -> Result<Vec<f64>> {
            let mut v = Vec::with_capacity(word_len);
            for _ in 0..word_len {
                let mut b = [0u8; 4];
                r.read_exact(&mut b)?;
                v.push(f32::from_le_bytes(b) as f64);
            }
            Ok(v)
        };
        let lower_paa = read_reals(&mut r)?;
        let upper_paa = read_reals(&mut r)?;
        envelope_list.push(UEnvelope {
            lower: ISaxWord {
                symbols: lo_sym,
                card_bits: vec![max_card_bits; word_len],
            },
            upper: ISaxWord {
                symbols: up_sym,
                card_bits: vec![max_card_bits; word_len],
            },
            lower_paa,
            upper_paa,
            series_id,
            start_offset,
            gamma: e_gamma,
            range,
            normalized,
        });
    }
    let n_root = read_u32(&mut r)? as usize;
    let mut root = BTreeMap::new();
    for _ in 0..n_root {
        let node = load_node(&mut r, word_len)?;
        root.insert(node.lower_word.symbols.clone(), node);
    }
    Ok(UlisseIndex {
        config,
        collection,
        envelope_list,
        root,
        data_fingerprint: fingerprint,
        data_ref: Some(data_path.to_path_buf()),
    })
}
