pub mod cells;
pub mod cli;
pub mod jacobian;
pub mod lipschitz;
pub mod prepare;
pub mod qp;
pub mod regions;
pub mod terms;
