//! Reduction compiler and verification harness for locally checkable labelings.

pub mod encode_ab;
pub mod error;
pub mod fixtures;
pub mod gadget_bd;
pub mod formalisms;
pub mod graph;
pub mod io;
pub mod re_compile;
pub mod iso;
pub mod local_sim;
pub mod pipeline;
pub mod view;

pub use error::{Error, Result};
pub use graph::{ball, gball, gdist, CenteredGraph, GDist, LabeledGraph, Label, MultiGraph, VertexId, Weight, BOTTOM};
pub use iso::{centered_iso, graph_iso};
pub use view::{pn_view, rooted_tree_iso, RootedView, Tag, ViewArena, ViewId};
