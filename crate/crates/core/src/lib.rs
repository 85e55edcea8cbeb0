//! QtVM: a quantum-computing virtual machine.
//!
//! An L-qubit state-vector engine ([`engine`]) with an optional sector/pagetable
//! layout ([`pagetable`]), an instruction set and interpreter with classical
//! registers and measurement-conditioned control flow ([`isa`], [`vm`]), the
//! QtASM assembler ([`asm`]), a probability-tree debugger ([`debugger`]),
//! circuit generators ([`circuits`]) and quench analytics ([`analytics`]).

pub mod engine;
pub mod isa;
pub mod optimize;
pub mod pagetable;
pub mod vm;
pub mod asm;
pub mod circuits;
pub mod debugger;
pub mod analytics;
pub mod bench;
pub mod cli;
