pub mod checks;
pub mod cosimplicial;
pub mod geo_operads;
pub mod poisson_operad;
pub mod ratlin;
pub mod spectral;
