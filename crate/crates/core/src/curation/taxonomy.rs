use std::collections::HashSet;
use std::path::Path;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::McqPair;

pub const UNCATEGORIZED: &str = "uncategorized";
pub const CATEGORY_COUNT: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub name: String,
    pub keywords: Vec<String>,
}

/// Nine networking sub-domains with keyword lists. File form:
/// `{"name": .., "categories": [{"name": .., "keywords": [..]}, ..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    pub name: String,
    pub categories: Vec<Category>,
}

fn cat(name: &str, keywords: &[&str]) -> Category {
    Category {
        name: name.to_string(),
        keywords: keywords.iter().map(|k| k.to_string()).collect(),
    }
}

impl Default for Taxonomy {
    fn default() -> Self {
        Taxonomy {
            name: "networking-9".into(),
            categories: vec![
                cat(
                    "Physical layer & Transmission",
                    &[
                        "physical layer", "bandwidth", "signal", "signals", "modulation", "encoding",
                        "fiber", "optical fiber", "coaxial", "twisted pair", "nyquist", "shannon",
                        "multiplexing", "fdm", "tdm", "baud", "attenuation", "noise",
                        "transmission medium", "bit rate", "analog", "manchester",
                    ],
                ),
                cat(
                    "Data link layer & LANs",
                    &[
                        "data link", "data link layer", "ethernet", "frame", "frames", "mac address",
                        "switch", "switches", "csma/cd", "arp", "vlan", "spanning tree", "crc",
                        "error detection", "hamming", "parity", "lan", "lans", "bridge", "ppp",
                        "hdlc", "stop-and-wait", "go-back-n", "selective repeat",
                    ],
                ),
                cat(
                    "Network layer and Routing",
                    &[
                        "network layer", "ip", "ipv4", "ipv6", "ip address", "router", "routers",
                        "routing", "routing table", "forwarding", "ospf", "bgp", "rip", "dijkstra",
                        "link-state", "distance-vector", "subnet", "subnet mask", "cidr", "nat",
                        "icmp", "datagram", "hop", "autonomous system", "longest prefix",
                    ],
                ),
                cat(
                    "Transport layer",
                    &[
                        "transport layer", "tcp", "udp", "port", "port number", "segment",
                        "segments", "congestion control", "flow control", "three-way handshake",
                        "retransmission", "acknowledgment", "acknowledgement", "ack",
                        "sliding window", "slow start", "congestion window", "socket", "quic",
                        "rtt",
                    ],
                ),
                cat(
                    "Application layer & Protocols",
                    &[
                        "application layer", "http", "https", "dns", "smtp", "ftp", "email",
                        "web", "url", "html", "pop3", "imap", "dhcp", "client-server",
                        "peer-to-peer", "p2p", "cdn", "cookie", "telnet", "domain name",
                    ],
                ),
                cat(
                    "Network security",
                    &[
                        "security", "encryption", "cryptography", "firewall", "authentication",
                        "certificate", "tls", "ssl", "ssh", "vpn", "ipsec", "public key",
                        "private key", "rsa", "aes", "malware", "attack", "attacker",
                        "denial of service", "ddos", "intrusion",
                    ],
                ),
                cat(
                    "Network management",
                    &[
                        "network management", "snmp", "mib", "management information base",
                        "monitoring", "configuration", "fault management", "netconf", "sdn",
                        "openflow", "controller", "syslog", "managed device",
                    ],
                ),
                cat(
                    "Wireless & Mobile networks",
                    &[
                        "wireless", "wifi", "wi-fi", "802.11", "bluetooth", "cellular", "lte",
                        "5g", "4g", "mobile", "mobility", "handoff", "handover", "access point",
                        "csma/ca", "base station", "antenna", "mimo", "ofdm",
                    ],
                ),
                cat(
                    "Performance & QoS",
                    &[
                        "qos", "quality of service", "latency", "delay", "throughput", "jitter",
                        "queueing", "queuing", "packet loss", "scheduling", "traffic shaping",
                        "token bucket", "leaky bucket", "diffserv", "intserv", "utilization",
                        "propagation delay", "transmission delay",
                    ],
                ),
            ],
        }
    }
}

impl Taxonomy {
    pub fn validate(&self) -> Result<()> {
        if self.categories.len() != CATEGORY_COUNT {
            return Err(Error::Config(format!(
                "taxonomy {:?} has {} categories, expected {CATEGORY_COUNT}",
                self.name,
                self.categories.len()
            )));
        }
        let mut names = HashSet::new();
        for c in &self.categories {
            if c.name.trim().is_empty() || c.name == UNCATEGORIZED {
                return Err(Error::Config(format!("invalid category name {:?}", c.name)));
            }
            if !names.insert(c.name.as_str()) {
                return Err(Error::Config(format!("duplicate category name {:?}", c.name)));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let t: Taxonomy = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("taxonomy {}: {e}", path.display())))?;
        t.validate()?;
        Ok(t)
    }

    pub fn matcher(&self) -> Result<TaxonomyMatcher> {
        TaxonomyMatcher::new(self)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|c| c.name.as_str())
    }
}

/// Compiled keyword matchers, one per category, in taxonomy order.
#[derive(Debug, Clone)]
pub struct TaxonomyMatcher {
    categories: Vec<(String, Option<Regex>)>,
}

impl TaxonomyMatcher {
    pub fn new(taxonomy: &Taxonomy) -> Result<Self> {
        taxonomy.validate()?;
        let categories = taxonomy
            .categories
            .iter()
            .map(|c| {
                let mut kws: Vec<String> = c
                    .keywords
                    .iter()
                    .map(|k| k.trim().to_lowercase())
                    .filter(|k| !k.is_empty())
                    .collect();
                // longest first so multi-word keywords win over their prefixes
                kws.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
                kws.dedup();
                if kws.is_empty() {
                    return Ok((c.name.clone(), None));
                }
                let alternation = kws.iter().map(|k| regex::escape(k)).collect::<Vec<_>>().join("|");
                let re = RegexBuilder::new(&format!(r"(?:^|[^\w])({alternation})(?:$|[^\w])"))
                    .case_insensitive(true)
                    .build()
                    .map_err(|e| Error::Config(format!("category {:?}: {e}", c.name)))?;
                Ok((c.name.clone(), Some(re)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TaxonomyMatcher { categories })
    }

    /// Whole-word keyword hits per category, in taxonomy order.
    pub fn scores(&self, text: &str) -> Vec<usize> {
        self.categories
            .iter()
            .map(|(_, re)| re.as_ref().map_or(0, |re| count_matches(re, text)))
            .collect()
    }

    /// Highest-scoring category over question and choices; ties go to the
    /// earlier category, no hits give [`UNCATEGORIZED`].
    pub fn classify(&self, pair: &McqPair) -> &str {
        let mut text = pair.question.clone();
        for (_, choice) in pair.choices.iter() {
            text.push('\n');
            text.push_str(choice);
        }
        self.classify_text(&text)
    }

    pub fn classify_text(&self, text: &str) -> &str {
        let scores = self.scores(text);
        let mut best: Option<(usize, usize)> = None;
        for (i, &s) in scores.iter().enumerate() {
            if s > 0 && best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        best.map_or(UNCATEGORIZED, |(i, _)| self.categories[i].0.as_str())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|(n, _)| n.as_str())
    }
}

/// Count non-overlapping whole-word matches; the boundary characters are
/// part of the pattern, so the search restarts at the end of the keyword.
fn count_matches(re: &Regex, text: &str) -> usize {
    let mut count = 0;
    let mut pos = 0;
    while pos <= text.len() {
        let Some(caps) = re.captures_at(text, pos) else {
            break;
        };
        let kw = caps.get(1).expect("keyword group");
        count += 1;
        pos = kw.end();
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Choices, Label};

    fn pair(question: &str) -> McqPair {
        McqPair::new(
            question,
            Choices::new("first", "second", "third", "fourth"),
            Label::A,
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn default_taxonomy_is_valid() {
        let t = Taxonomy::default();
        t.validate().unwrap();
        assert_eq!(t.categories.len(), 9);
        assert!(t.names().any(|n| n == "Network layer and Routing"));
    }

    #[test]
    fn routing_table_and_ospf() {
        let m = Taxonomy::default().matcher().unwrap();
        let p = pair("How does OSPF populate the routing table of each router in an area?");
        assert_eq!(m.classify(&p), "Network layer and Routing");
    }

    #[test]
    fn no_keywords() {
        let m = Taxonomy::default().matcher().unwrap();
        assert_eq!(m.classify(&pair("What colour is the sky on a clear day?")), UNCATEGORIZED);
    }

    #[test]
    fn whole_words_only() {
        let m = Taxonomy::default().matcher().unwrap();
        // "tcpdump" and "ripple" must not count as TCP or RIP
        assert_eq!(m.classify_text("tcpdump shows a ripple"), UNCATEGORIZED);
        assert_eq!(m.classify_text("TCP, TCP and tcp."), "Transport layer");
        assert_eq!(m.scores("tcp tcp")[3], 2);
        assert_eq!(m.scores("Wi-Fi uses 802.11 and CSMA/CA")[7], 3);
    }

    #[test]
    fn ties_go_to_earlier_category() {
        let m = Taxonomy::default().matcher().unwrap();
        // one hit each for Transport (TCP) and Network security (firewall)
        assert_eq!(m.classify_text("firewall and TCP"), "Transport layer");
        assert_eq!(m.classify_text("TCP and firewall"), "Transport layer");
    }

    #[test]
    fn rejects_wrong_category_count_and_duplicates() {
        let mut t = Taxonomy::default();
        t.categories.pop();
        assert!(t.validate().is_err());
        let mut t = Taxonomy::default();
        t.categories[1].name = t.categories[0].name.clone();
        assert!(t.validate().is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tax.json");
        std::fs::write(&path, serde_json::to_string(&Taxonomy::default()).unwrap()).unwrap();
        assert_eq!(Taxonomy::load(&path).unwrap(), Taxonomy::default());
    }
}
