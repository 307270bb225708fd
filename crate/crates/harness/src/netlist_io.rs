//! Netlist JSON files.

use std::path::Path;

use npid_core::Netlist;

use crate::Error;

pub fn to_json(net: &Netlist) -> String {
    serde_json::to_string_pretty(net).expect("netlist serializes")
}

/// Parses and validates a netlist.
pub fn from_json(text: &str) -> Result<Netlist, Error> {
    let net: Netlist = serde_json::from_str(text)?;
    net.validate()?;
    Ok(net)
}

pub fn write_netlist(net: &Netlist, path: &Path) -> Result<(), Error> {
    net.validate()?;
    let mut text = to_json(net);
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_netlist(path: &Path) -> Result<Netlist, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use npid_core::{NpidConfig, NpidNetwork};

    #[test]
    fn round_trip() {
        let net = NpidNetwork::new(NpidConfig::standard(15, npid_core::Distribution::Quadratic))
            .unwrap()
            .netlist()
            .unwrap();
        assert_eq!(from_json(&to_json(&net)).unwrap(), net);
    }

    #[test]
    fn broken_netlist_rejected() {
        let mut net = NpidNetwork::new(NpidConfig::standard(15, npid_core::Distribution::Uniform))
            .unwrap()
            .netlist()
            .unwrap();
        net.synapses[0].weight = 3;
        assert!(from_json(&to_json(&net)).is_err());
    }
}
