use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::registry::Registry;

use super::BpelProcess;

/// Applies bindings without requiring every link to end up bound. Bindings
/// of already bound links replace the previous provider.
pub fn assign_partners(
    process: &BpelProcess,
    bindings: &BTreeMap<String, String>,
    registry: &Registry,
) -> Result<BpelProcess> {
    let mut out = process.clone();
    for (link_name, provider_id) in bindings {
        let link = out
            .partner_links
            .iter_mut()
            .find(|l| l.name == *link_name)
            .ok_or_else(|| Error::UnknownPartnerLink(link_name.clone()))?;
        let provider = registry
            .get(provider_id)
            .ok_or_else(|| Error::UnknownProvider(provider_id.clone()))?;
        if provider.family != link.family {
            return Err(Error::FamilyMismatch {
                link: link_name.clone(),
                provider: provider_id.clone(),
                expected: link.family.clone(),
                actual: provider.family.clone(),
            });
        }
        link.provider = Some(provider_id.clone());
    }
    Ok(out)
}

/// Binds partner links to providers, producing an executable process.
pub fn bind_partners(
    process: &BpelProcess,
    bindings: &BTreeMap<String, String>,
    registry: &Registry,
) -> Result<BpelProcess> {
    let out = assign_partners(process, bindings, registry)?;
    if let Some(link) = out.partner_links.iter().find(|l| l.provider.is_none()) {
        return Err(Error::UnboundLink(link.name.clone()));
    }
    Ok(out)
}
