//! Node record serialization for snapshots. Lives beside the node type so
//! the snapshot module never sees tree internals.

use std::io::{Read, Write};

use crate::error::Error;
use crate::snapshot::{
    read_ball, read_point, read_stats, read_u32, write_ball, write_point, write_stats,
    SnapshotError,
};
use crate::tree::node::{Child, Node, NodeKind};

const KIND_LEAF: u8 = 0;
const KIND_INNER: u8 = 1;

pub(crate) struct NodeWriter<'a, W: Write> {
    pub sink: &'a mut W,
}

impl<W: Write> NodeWriter<'_, W> {
    pub fn write_node(&mut self, node: &Node) -> Result<(), Error> {
        match &node.kind {
            NodeKind::Leaf(points) => {
                self.sink.write_all(&[KIND_LEAF])?;
                write_ball(self.sink, &node.ball)?;
                write_stats(self.sink, &node.stats)?;
                self.sink.write_all(&(points.len() as u32).to_le_bytes())?;
                for p in points {
                    write_point(self.sink, p)?;
                }
            }
            NodeKind::Inner(children) => {
                self.sink.write_all(&[KIND_INNER])?;
                write_ball(self.sink, &node.ball)?;
                write_stats(self.sink, &node.stats)?;
                self.sink.write_all(&(children.len() as u32).to_le_bytes())?;
                for c in children {
                    self.write_node(&c.node)?;
                }
            }
        }
        Ok(())
    }
}

pub(crate) struct NodeReader<'a, R: Read> {
    pub source: &'a mut R,
    pub dim: u32,
}

impl<R: Read> NodeReader<'_, R> {
    pub fn read_node(&mut self) -> Result<Node, Error> {
        let mut kind = [0u8; 1];
        self.source.read_exact(&mut kind).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                Error::Snapshot(SnapshotError::Truncated)
            } else {
                Error::Io(e)
            }
        })?;
        let ball = read_ball(self.source)?;
        let stats = read_stats(self.source, self.dim)?;
        let count = read_u32(self.source)? as usize;
        if count == 0 {
            return Err(SnapshotError::Corrupt("empty node record").into());
        }
        let kind = match kind[0] {
            KIND_LEAF => {
                let mut points = Vec::with_capacity(count.min(1 << 20));
                for _ in 0..count {
                    points.push(read_point(self.source, self.dim)?);
                }
                NodeKind::Leaf(points)
            }
            KIND_INNER => {
                let mut children = Vec::with_capacity(count.min(1 << 20));
                for _ in 0..count {
                    let node = self.read_node()?;
                    children.push(Child::from_node(node));
                }
                NodeKind::Inner(children)
            }
            _ => return Err(SnapshotError::Corrupt("unknown node kind").into()),
        };
        Ok(Node { ball, stats, kind })
    }
}
