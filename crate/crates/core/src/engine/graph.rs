//! Property-graph engine with index-free adjacency.
//!
//! Sectors, stocks, articles and bars are nodes; `IN_SECTOR`, `MENTIONS` and
//! `HAS_BAR` are typed relationships stored as adjacency lists on both
//! endpoints. Each stock's `HAS_BAR` list is kept in timestamp order and
//! sliced by day, so reaching the bars of one stock on one day costs a map
//! lookup plus the bars themselves.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;

use super::{hit_stocks_by_day, Engine, EngineError, ScorerFamily};
use crate::model::{
    canonical_order, BarRow, Dataset, Day, DocId, EngineKind, OhlcBar, RowTag, SearchHit, Symbol,
    Timestamp,
};
use crate::text::{search, Bm25Params, InvertedIndex, QueryTerms};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Sector,
    Stock,
    News,
    Bar,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Sector => "Sector",
            Label::Stock => "Stock",
            Label::News => "News",
            Label::Bar => "OHLC",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelType {
    InSector,
    Mentions,
    HasBar,
}

impl RelType {
    pub fn as_str(self) -> &'static str {
        match self {
            RelType::InSector => "IN_SECTOR",
            RelType::Mentions => "MENTIONS",
            RelType::HasBar => "HAS_BAR",
        }
    }

    fn endpoints(self) -> (Label, Label) {
        match self {
            RelType::InSector => (Label::Stock, Label::Sector),
            RelType::Mentions => (Label::News, Label::Stock),
            RelType::HasBar => (Label::Stock, Label::Bar),
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Outgoing,
    Incoming,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeProps {
    Sector { name: String },
    Stock { symbol: Symbol, name: String },
    News { doc_id: DocId, media: String, date: Timestamp },
    Bar(OhlcBar),
}

impl NodeProps {
    pub fn label(&self) -> Label {
        match self {
            NodeProps::Sector { .. } => Label::Sector,
            NodeProps::Stock { .. } => Label::Stock,
            NodeProps::News { .. } => Label::News,
            NodeProps::Bar(_) => Label::Bar,
        }
    }
}

#[derive(Debug)]
struct Node {
    props: NodeProps,
    out: [Vec<NodeId>; 3],
    inc: [Vec<NodeId>; 3],
}

/// Work done by a traced traversal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub stocks_visited: usize,
    pub bars_visited: usize,
}

impl Trace {
    pub fn visited_nodes(&self) -> usize {
        self.stocks_visited + self.bars_visited
    }
}

#[derive(Debug)]
pub struct GraphEngine {
    nodes: Vec<Node>,
    by_label: HashMap<Label, Vec<NodeId>>,
    by_symbol: HashMap<Symbol, NodeId>,
    by_doc: HashMap<DocId, NodeId>,
    /// Stock node -> day -> range into its outgoing `HAS_BAR` list.
    day_slices: HashMap<NodeId, BTreeMap<Day, Range<usize>>>,
    content: InvertedIndex,
    params: Bm25Params,
}

impl Default for GraphEngine {
    fn default() -> Self {
        GraphEngine {
            nodes: Vec::new(),
            by_label: HashMap::new(),
            by_symbol: HashMap::new(),
            by_doc: HashMap::new(),
            day_slices: HashMap::new(),
            content: InvertedIndex::new(),
            params: Bm25Params::default(),
        }
    }
}

impl GraphEngine {
    pub fn load(dataset: &Dataset) -> Result<Self, EngineError> {
        Self::load_with(dataset, Bm25Params::default())
    }

    pub fn load_with(dataset: &Dataset, params: Bm25Params) -> Result<Self, EngineError> {
        let mut g = GraphEngine { params, ..GraphEngine::default() };
        let mut sector_nodes = HashMap::new();
        for s in dataset.sectors() {
            sector_nodes.insert(s.id, g.create_node(NodeProps::Sector { name: s.name.clone() }));
        }
        for s in dataset.stocks() {
            let id = g.create_node(NodeProps::Stock { symbol: s.symbol.clone(), name: s.name.clone() });
            g.by_symbol.insert(s.symbol.clone(), id);
            let sector = *sector_nodes
                .get(&s.sector)
                .ok_or_else(|| EngineError::Other(format!("stock {} has no sector node", s.symbol)))?;
            g.create_rel(RelType::InSector, id, sector)?;
        }
        for doc in dataset.news() {
            let id = g.create_node(NodeProps::News { doc_id: doc.doc_id, media: doc.media.clone(), date: doc.timestamp });
            g.by_doc.insert(doc.doc_id, id);
            g.content.insert(doc.doc_id, &doc.content)?;
            for symbol in &doc.mentions {
                if let Some(&stock) = g.by_symbol.get(symbol) {
                    g.create_rel(RelType::Mentions, id, stock)?;
                }
            }
        }
        for bar in dataset.bars() {
            let Some(&stock) = g.by_symbol.get(&bar.symbol) else { continue };
            let id = g.create_node(NodeProps::Bar(bar.clone()));
            g.create_rel(RelType::HasBar, stock, id)?;
        }
        g.build_day_slices();
        Ok(g)
    }

    pub fn create_node(&mut self, props: NodeProps) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.by_label.entry(props.label()).or_default().push(id);
        self.nodes.push(Node { props, out: Default::default(), inc: Default::default() });
        id
    }

    /// Connects two existing nodes whose labels match the relationship type.
    pub fn create_rel(&mut self, rel: RelType, from: NodeId, to: NodeId) -> Result<(), EngineError> {
        let from_label = self.node(from).map_err(|_| EngineError::DanglingEndpoint(from.0))?.label();
        let to_label = self.node(to).map_err(|_| EngineError::DanglingEndpoint(to.0))?.label();
        if (from_label, to_label) != rel.endpoints() {
            return Err(EngineError::LabelMismatch { rel: rel.as_str(), from: from_label.as_str(), to: to_label.as_str() });
        }
        self.nodes[from.0 as usize].out[rel.slot()].push(to);
        self.nodes[to.0 as usize].inc[rel.slot()].push(from);
        Ok(())
    }

    fn build_day_slices(&mut self) {
        let mut slices = HashMap::new();
        for stock in self.nodes_with_label(Label::Stock).to_vec() {
            let mut bars = std::mem::take(&mut self.nodes[stock.0 as usize].out[RelType::HasBar.slot()]);
            let ts = |id: &NodeId, nodes: &[Node]| match &nodes[id.0 as usize].props {
                NodeProps::Bar(b) => b.timestamp,
                _ => Timestamp::from_micros(i64::MIN),
            };
            bars.sort_by_key(|id| ts(id, &self.nodes));
            let mut by_day: BTreeMap<Day, Range<usize>> = BTreeMap::new();
            for (i, id) in bars.iter().enumerate() {
                let day = ts(id, &self.nodes).day();
                by_day.entry(day).and_modify(|r| r.end = i + 1).or_insert(i..i + 1);
            }
            self.nodes[stock.0 as usize].out[RelType::HasBar.slot()] = bars;
            slices.insert(stock, by_day);
        }
        self.day_slices = slices;
    }

    pub fn node(&self, id: NodeId) -> Result<&NodeProps, EngineError> {
        self.nodes.get(id.0 as usize).map(|n| &n.props).ok_or(EngineError::UnknownNode(id.0))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn relationship_count(&self) -> usize {
        self.nodes.iter().map(|n| n.out.iter().map(Vec::len).sum::<usize>()).sum()
    }

    pub fn nodes_with_label(&self, label: Label) -> &[NodeId] {
        self.by_label.get(&label).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn stock_node(&self, symbol: &str) -> Option<NodeId> {
        self.by_symbol.get(symbol).copied()
    }

    pub fn neighbors(&self, id: NodeId, rel: RelType, dir: Direction) -> Result<&[NodeId], EngineError> {
        let node = self.nodes.get(id.0 as usize).ok_or(EngineError::UnknownNode(id.0))?;
        Ok(match dir {
            Direction::Outgoing => &node.out[rel.slot()],
            Direction::Incoming => &node.inc[rel.slot()],
        })
    }

    pub fn content_index(&self) -> &InvertedIndex {
        &self.content
    }

    /// Bars of one stock node on one day.
    fn bars_on(&self, stock: NodeId, day: Day) -> impl Iterator<Item = &OhlcBar> {
        let list = &self.nodes[stock.0 as usize].out[RelType::HasBar.slot()];
        let range = self.day_slices.get(&stock).and_then(|m| m.get(&day)).cloned().unwrap_or(0..0);
        list[range].iter().filter_map(|id| match &self.nodes[id.0 as usize].props {
            NodeProps::Bar(b) => Some(b),
            _ => None,
        })
    }

    pub fn graph_fulltext(&self, terms: &QueryTerms, k: Option<usize>) -> Result<Vec<SearchHit>, EngineError> {
        let mut hits = Vec::new();
        for (doc_id, score) in search(&self.content, terms, k, self.params) {
            let node = *self.by_doc.get(&doc_id).ok_or(EngineError::Other(format!("doc {doc_id} has no node")))?;
            let NodeProps::News { media, date, .. } = self.node(node)? else {
                return Err(EngineError::Other(format!("doc {doc_id} is not a News node")));
            };
            for &stock in self.neighbors(node, RelType::Mentions, Direction::Outgoing)? {
                if let NodeProps::Stock { symbol, .. } = self.node(stock)? {
                    hits.push(SearchHit { doc_id, symbol: symbol.clone(), date: *date, media: media.clone(), score });
                }
            }
        }
        Ok(canonical_order(hits))
    }

    /// Hit stock, then its `HAS_BAR` slice for each offset day, counting the
    /// nodes touched.
    fn symbol_of(&self, id: NodeId) -> Option<&Symbol> {
        match &self.nodes.get(id.0 as usize)?.props {
            NodeProps::Stock { symbol, .. } => Some(symbol),
            _ => None,
        }
    }

    /// Traversal frontier keyed by (symbol, bar day), so rows come out in
    /// canonical order and each (stock, day) slice is read once.
    fn emit_ordered<V: Clone>(
        &self,
        frontier: BTreeMap<(Symbol, Day), (NodeId, BTreeSet<V>)>,
        mut emit: impl FnMut(&OhlcBar, &V),
    ) -> usize {
        let mut bars = 0;
        for ((_, day), (stock, values)) in frontier {
            for bar in self.bars_on(stock, day) {
                bars += 1;
                for v in &values {
                    emit(bar, v);
                }
            }
        }
        bars
    }

    pub fn graph_affected_traced(&self, hits: &[SearchHit], offsets: &[i32]) -> (Vec<BarRow>, Trace) {
        let mut trace = Trace::default();
        let mut seen = BTreeSet::new();
        let mut frontier: BTreeMap<(Symbol, Day), (NodeId, BTreeSet<Day>)> = BTreeMap::new();
        for hit in hits {
            let Some(stock) = self.stock_node(hit.symbol.as_str()) else { continue };
            if seen.insert(stock) {
                trace.stocks_visited += 1;
            }
            let anchor = hit.day();
            for &o in offsets {
                frontier.entry((hit.symbol.clone(), anchor.offset(o))).or_insert((stock, BTreeSet::new())).1.insert(anchor);
            }
        }
        let mut rows = Vec::new();
        trace.bars_visited = self.emit_ordered(frontier, |bar, &anchor| {
            rows.push(BarRow { tag: RowTag::Affected, anchor, via: None, bar: bar.clone() })
        });
        (rows, trace)
    }

    pub fn graph_unaffected(&self, hits: &[SearchHit], offsets: &[i32]) -> Vec<BarRow> {
        let mut frontier: BTreeMap<(Symbol, Day), (NodeId, BTreeSet<Day>)> = BTreeMap::new();
        for (&anchor, hit_stocks) in &hit_stocks_by_day(hits) {
            for &stock in self.nodes_with_label(Label::Stock) {
                let Some(symbol) = self.symbol_of(stock) else { continue };
                if hit_stocks.contains(symbol) {
                    continue;
                }
                for &o in offsets {
                    frontier.entry((symbol.clone(), anchor.offset(o))).or_insert((stock, BTreeSet::new())).1.insert(anchor);
                }
            }
        }
        let mut rows = Vec::new();
        self.emit_ordered(frontier, |bar, &anchor| {
            rows.push(BarRow { tag: RowTag::Unaffected, anchor, via: None, bar: bar.clone() })
        });
        rows
    }

    /// (stock)-[:IN_SECTOR]->(sector)<-[:IN_SECTOR]-(peer)-[:HAS_BAR]->(bar)
    pub fn graph_sector_peers(&self, hits: &[SearchHit]) -> Result<Vec<BarRow>, EngineError> {
        let mut frontier: BTreeMap<(Symbol, Day), (NodeId, BTreeSet<Symbol>)> = BTreeMap::new();
        for hit in hits {
            let Some(stock) = self.stock_node(hit.symbol.as_str()) else { continue };
            let anchor = hit.day();
            for &sector in self.neighbors(stock, RelType::InSector, Direction::Outgoing)? {
                for &peer in self.neighbors(sector, RelType::InSector, Direction::Incoming)? {
                    let Some(symbol) = self.symbol_of(peer).filter(|_| peer != stock) else { continue };
                    frontier.entry((symbol.clone(), anchor)).or_insert((peer, BTreeSet::new())).1.insert(hit.symbol.clone());
                }
            }
        }
        let mut rows = Vec::new();
        self.emit_ordered(frontier, |bar, seed| {
            rows.push(BarRow { tag: RowTag::Peer, anchor: bar.day(), via: Some(seed.clone()), bar: bar.clone() })
        });
        Ok(rows)
    }
}

impl Engine for GraphEngine {
    fn kind(&self) -> EngineKind {
        EngineKind::Graph
    }

    fn scorer(&self) -> ScorerFamily {
        ScorerFamily::Bm25
    }

    fn fulltext(&self, terms: &QueryTerms, k: Option<usize>) -> Result<Vec<SearchHit>, EngineError> {
        self.graph_fulltext(terms, k)
    }

    fn affected_bars(&self, hits: &[SearchHit], offsets: &[i32]) -> Result<Vec<BarRow>, EngineError> {
        Ok(self.graph_affected_traced(hits, offsets).0)
    }

    fn unaffected_bars(&self, hits: &[SearchHit], offsets: &[i32]) -> Result<Vec<BarRow>, EngineError> {
        Ok(self.graph_unaffected(hits, offsets))
    }

    fn sector_peer_bars(&self, hits: &[SearchHit]) -> Result<Vec<BarRow>, EngineError> {
        self.graph_sector_peers(hits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relationship_typing() {
        let mut g = GraphEngine::default();
        let sector = g.create_node(NodeProps::Sector { name: "Energy".into() });
        let stock = g.create_node(NodeProps::Stock { symbol: Symbol::new("ONGC"), name: "Oil".into() });
        g.create_rel(RelType::InSector, stock, sector).unwrap();
        assert_eq!(g.neighbors(sector, RelType::InSector, Direction::Incoming).unwrap(), &[stock]);
        assert!(matches!(
            g.create_rel(RelType::InSector, sector, stock),
            Err(EngineError::LabelMismatch { rel: "IN_SECTOR", .. })
        ));
        assert_eq!(g.create_rel(RelType::HasBar, stock, NodeId(9)), Err(EngineError::DanglingEndpoint(9)));
        assert_eq!(g.neighbors(NodeId(7), RelType::HasBar, Direction::Outgoing), Err(EngineError::UnknownNode(7)));
        assert_eq!(g.relationship_count(), 1);
    }
}
