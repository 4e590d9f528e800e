//! Lowers a [`NormalizedSpec`] into a [`DataflowGraph`].
//!
//! A static base compile emits data, scale and mark nodes. Six animation
//! stages then run in order, each adding nodes tagged with its [`Stage`]:
//! clock, time scale, selections, filter transforms, key and enter/exit.

pub mod ir;
pub(crate) mod stages;
pub mod timing;
mod verify;

use std::collections::BTreeMap;

pub use ir::*;
pub use stages::{
    compile_animation_clock, compile_animation_selections, compile_enter_exit, compile_filter_transforms, compile_key,
    compile_static, compile_time_scale,
};
pub use timing::Timeline;
pub use verify::{topological_order, verify_graph};

use crate::error::CompileError;
use crate::model::table::DataTable;
use crate::normalize::NormalizedSpec;

/// Nodes accumulated across stages.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    nodes: BTreeMap<String, Node>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a node; re-emitting an identical node is a no-op.
    pub fn emit(&mut self, stage: Stage, id: impl Into<String>, kind: NodeKind) -> Result<(), CompileError> {
        let id = id.into();
        let node = Node {
            id: id.clone(),
            stage,
            rewritten_by: None,
            kind,
        };
        match self.nodes.get(&id) {
            Some(old) if old.kind == node.kind => Ok(()),
            Some(_) => Err(CompileError::Verify(format!("node {id} emitted twice"))),
            None => {
                self.nodes.insert(id, node);
                Ok(())
            }
        }
    }

    /// Replaces the payload of an existing node on behalf of `stage`.
    pub fn rewrite(&mut self, stage: Stage, id: &str, kind: NodeKind) -> Result<(), CompileError> {
        let node = self
            .nodes
            .get_mut(id)
            .ok_or_else(|| CompileError::Verify(format!("cannot rewrite missing node {id}")))?;
        if node.kind != kind {
            node.kind = kind;
            node.rewritten_by = Some(stage);
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn finish(self, width: f64, height: f64) -> DataflowGraph {
        DataflowGraph::from_nodes(width, height, self.nodes.into_values())
    }
}

/// Runs the base compile and the six animation stages, then verifies the
/// result.
pub fn compile(nspec: &NormalizedSpec, data: &DataTable) -> Result<DataflowGraph, CompileError> {
    let mut b = GraphBuilder::new();
    compile_static(nspec, data, &mut b)?;
    compile_animation_clock(nspec, &mut b)?;
    compile_time_scale(nspec, &mut b)?;
    compile_animation_selections(nspec, &mut b)?;
    compile_filter_transforms(nspec, &mut b)?;
    compile_key(nspec, &mut b)?;
    compile_enter_exit(nspec, &mut b)?;
    let g = b.finish(nspec.width(), nspec.height());
    let problems = verify_graph(&g);
    if let Some(first) = problems.iter().find(|d| d.is_error()) {
        return Err(CompileError::Verify(first.to_string()));
    }
    Ok(g)
}
