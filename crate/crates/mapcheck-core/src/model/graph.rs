//! Explicit-graph models: a line-oriented text format and its
//! `TransitionSystem` view.
//!
//! The format is hand-writable so test fixtures can be checked by eye:
//!
//! ```text
//! # comment
//! states <N>
//! init <id> [<id> ...]
//! accept <id> [<id> ...]
//! edge <src> <dst>
//! ```
//!
//! Ids are decimal and 0-based; `states` must precede any id reference.
//! Adjacency lists preserve file order. States encode as 4-byte big-endian
//! ids.

use super::{codec, EncodedState, ModelError, TransitionSystem};

/// Byte width of every explicit-graph state encoding.
pub const GRAPH_STATE_WIDTH: usize = 4;

/// A finite graph with initial states, an accepting set and ordered
/// adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitGraph {
    num_states: u32,
    initial: Vec<u32>,
    accepting: Vec<bool>,
    edges: Vec<Vec<u32>>,
}

/// Parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct GraphParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl GraphParseError {
    fn new(line: u32, col: u32, message: impl Into<String>) -> Self {
        GraphParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

/// (1-based column, token) pairs of one line, comments stripped.
fn tokenize_line(line: &str) -> Vec<(u32, &str)> {
    let mut out = Vec::new();
    let mut col = 1u32;
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch == '#' {
            if let Some((s, c)) = start {
                out.push((c, &line[s..i]));
            }
            return out;
        }
        if ch.is_whitespace() {
            if let Some((s, c)) = start.take() {
                out.push((c, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some((i, col));
        }
        col += 1;
    }
    if let Some((s, c)) = start {
        out.push((c, &line[s..]));
    }
    out
}

impl ExplicitGraph {
    pub fn new(num_states: u32) -> Self {
        ExplicitGraph {
            num_states,
            initial: Vec::new(),
            accepting: vec![false; num_states as usize],
            edges: vec![Vec::new(); num_states as usize],
        }
    }

    pub fn num_states(&self) -> u32 {
        self.num_states
    }

    pub fn initial(&self) -> &[u32] {
        &self.initial
    }

    pub fn is_accepting(&self, id: u32) -> bool {
        self.accepting[id as usize]
    }

    pub fn successors_of(&self, id: u32) -> &[u32] {
        &self.edges[id as usize]
    }

    pub fn add_initial(&mut self, id: u32) {
        debug_assert!(id < self.num_states);
        self.initial.push(id);
    }

    pub fn set_accepting(&mut self, id: u32) {
        self.accepting[id as usize] = true;
    }

    pub fn add_edge(&mut self, src: u32, dst: u32) {
        debug_assert!(src < self.num_states && dst < self.num_states);
        self.edges[src as usize].push(dst);
    }

    /// Parse the line-oriented text format.
    pub fn parse(text: &str) -> Result<Self, GraphParseError> {
        let mut graph: Option<ExplicitGraph> = None;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx as u32 + 1;
            let tokens = tokenize_line(raw);
            if tokens.is_empty() {
                continue;
            }
            let (kw_col, keyword) = tokens[0];
            let args = &tokens[1..];
            let parse_id = |graph: &ExplicitGraph, col: u32, tok: &str| -> Result<u32, GraphParseError> {
                let id: u32 = tok.parse().map_err(|_| {
                    GraphParseError::new(lineno, col, format!("expected a state id, got `{tok}`"))
                })?;
                if id >= graph.num_states {
                    return Err(GraphParseError::new(
                        lineno,
                        col,
                        format!("state id {id} out of range (states {})", graph.num_states),
                    ));
                }
                Ok(id)
            };
            match keyword {
                "states" => {
                    if graph.is_some() {
                        return Err(GraphParseError::new(lineno, kw_col, "duplicate `states` directive"));
                    }
                    let (col, tok) = *args.first().ok_or_else(|| {
                        GraphParseError::new(lineno, kw_col, "`states` needs a count")
                    })?;
                    if args.len() > 1 {
                        return Err(GraphParseError::new(lineno, args[1].0, "trailing tokens after count"));
                    }
                    let n: u32 = tok.parse().map_err(|_| {
                        GraphParseError::new(lineno, col, format!("expected a count, got `{tok}`"))
                    })?;
                    graph = Some(ExplicitGraph::new(n));
                }
                "init" | "accept" => {
                    let g = graph.as_mut().ok_or_else(|| {
                        GraphParseError::new(lineno, kw_col, "`states` must precede other directives")
                    })?;
                    if args.is_empty() {
                        return Err(GraphParseError::new(
                            lineno,
                            kw_col,
                            format!("`{keyword}` needs at least one state id"),
                        ));
                    }
                    for &(col, tok) in args {
                        let id = parse_id(g, col, tok)?;
                        if keyword == "init" {
                            g.initial.push(id);
                        } else {
                            g.accepting[id as usize] = true;
                        }
                    }
                }
                "edge" => {
                    let g = graph.as_mut().ok_or_else(|| {
                        GraphParseError::new(lineno, kw_col, "`states` must precede other directives")
                    })?;
                    if args.len() != 2 {
                        return Err(GraphParseError::new(lineno, kw_col, "`edge` needs exactly <src> <dst>"));
                    }
                    let src = parse_id(g, args[0].0, args[0].1)?;
                    let dst = parse_id(g, args[1].0, args[1].1)?;
                    g.edges[src as usize].push(dst);
                }
                other => {
                    return Err(GraphParseError::new(
                        lineno,
                        kw_col,
                        format!("unknown directive `{other}`"),
                    ));
                }
            }
        }
        graph.ok_or_else(|| GraphParseError::new(1, 1, "missing `states` directive"))
    }

    /// Serialize back to the text format (used to write fixtures).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("states {}\n", self.num_states));
        if !self.initial.is_empty() {
            out.push_str("init");
            for id in &self.initial {
                out.push_str(&format!(" {id}"));
            }
            out.push('\n');
        }
        let accepting: Vec<u32> = (0..self.num_states).filter(|&i| self.accepting[i as usize]).collect();
        if !accepting.is_empty() {
            out.push_str("accept");
            for id in accepting {
                out.push_str(&format!(" {id}"));
            }
            out.push('\n');
        }
        for src in 0..self.num_states {
            for dst in &self.edges[src as usize] {
                out.push_str(&format!("edge {src} {dst}\n"));
            }
        }
        out
    }
}

/// `TransitionSystem` view of an [`ExplicitGraph`].
pub struct GraphSystem {
    graph: ExplicitGraph,
}

impl GraphSystem {
    pub fn new(graph: ExplicitGraph) -> Self {
        GraphSystem { graph }
    }

    pub fn graph(&self) -> &ExplicitGraph {
        &self.graph
    }

    fn decode(&self, state: &EncodedState) -> Result<u32, ModelError> {
        let id = codec::decode_id(state, GRAPH_STATE_WIDTH)? as u32;
        if id >= self.graph.num_states {
            return Err(ModelError::MalformedState(format!(
                "state id {id} out of range (states {})",
                self.graph.num_states
            )));
        }
        Ok(id)
    }

    fn encode(&self, id: u32) -> EncodedState {
        codec::encode_id(id as u64, GRAPH_STATE_WIDTH).expect("graph id fits in 4 bytes")
    }
}

impl TransitionSystem for GraphSystem {
    fn state_width(&self) -> usize {
        GRAPH_STATE_WIDTH
    }

    fn initial_states(&self) -> Vec<EncodedState> {
        self.graph.initial.iter().map(|&id| self.encode(id)).collect()
    }

    fn successors(&self, state: &EncodedState) -> Result<Vec<EncodedState>, ModelError> {
        let id = self.decode(state)?;
        Ok(self.graph.edges[id as usize].iter().map(|&d| self.encode(d)).collect())
    }

    fn is_accepting(&self, state: &EncodedState) -> Result<bool, ModelError> {
        let id = self.decode(state)?;
        Ok(self.graph.accepting[id as usize])
    }

    fn recode(&self, state: &EncodedState) -> Result<EncodedState, ModelError> {
        Ok(self.encode(self.decode(state)?))
    }

    fn describe(&self, state: &EncodedState) -> Result<String, ModelError> {
        Ok(format!("state {}", self.decode(state)?))
    }
}

/// Parse graph text into a ready-to-run transition system.
pub fn load_graph(text: &str) -> Result<GraphSystem, GraphParseError> {
    Ok(GraphSystem::new(ExplicitGraph::parse(text)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = "\
# four-state accepting-cycle example
states 5
init 4
accept 2 4
edge 4 3
edge 3 1
edge 1 2
edge 2 3
";

    #[test]
    fn parses_fig2_shape() {
        let sys = load_graph(FIG2).unwrap();
        let g = sys.graph();
        assert!(g.is_accepting(2) && g.is_accepting(4));
        assert!(!g.is_accepting(1) && !g.is_accepting(3));
        assert_eq!(g.successors_of(1), &[2]);
        assert_eq!(g.initial(), &[4]);
    }

    #[test]
    fn isolated_initial_state() {
        let sys = load_graph("states 1\ninit 0\n").unwrap();
        let init = sys.initial_states();
        assert_eq!(init.len(), 1);
        assert!(sys.successors(&init[0]).unwrap().is_empty());
        assert!(!sys.is_accepting(&init[0]).unwrap());
    }

    #[test]
    fn reports_syntax_error_position() {
        let err = ExplicitGraph::parse("states 2\nedge 0 x\n").unwrap_err();
        assert_eq!((err.line, err.col), (2, 8));
        assert!(err.message.contains("expected a state id"));
    }

    #[test]
    fn reports_dangling_id() {
        let err = ExplicitGraph::parse("states 2\nedge 0 7\n").unwrap_err();
        assert_eq!((err.line, err.col), (2, 8));
        assert!(err.message.contains("out of range"));
    }

    #[test]
    fn requires_states_first() {
        let err = ExplicitGraph::parse("init 0\nstates 2\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("must precede"));
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let sys = load_graph("# top\nstates 2\n\ninit 0 # trailing\nedge 0 1\n").unwrap();
        assert_eq!(sys.graph().initial(), &[0]);
        assert_eq!(sys.graph().successors_of(0), &[1]);
    }

    #[test]
    fn roundtrips_through_text() {
        let g = ExplicitGraph::parse(FIG2).unwrap();
        let again = ExplicitGraph::parse(&g.to_text()).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn decode_rejects_out_of_range_id() {
        let sys = load_graph("states 2\ninit 0\n").unwrap();
        let bogus = codec::encode_id(9, 4).unwrap();
        assert!(sys.successors(&bogus).is_err());
    }
}
