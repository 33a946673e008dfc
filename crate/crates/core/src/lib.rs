pub mod cli;
pub mod complex2;
pub mod diagram;
pub mod growth;
pub mod presentation;
pub mod plmaps;
pub mod pushing;
