pub mod abm_oracle;
