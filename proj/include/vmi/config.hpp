#pragma once

#include <string>

#include "vmi/synth.hpp"
#include "vmi/types.hpp"

namespace vmi {

struct toolkit_config {
    analysis_config analysis;
    synth_config synth;
};

// flat dotted key=value overrides on top of `base`; '#'/';' comment lines;
// unknown keys are errors so typos cannot silently change an analysis
toolkit_config parse_config_text(const std::string& text,
                                 const toolkit_config& base = {});

toolkit_config load_config_file(const std::string& path,
                                const toolkit_config& base = {});

// canonical key=value rendering of every setting, in fixed order; this is
// what run manifests digest
std::string dump_config(const toolkit_config& cfg);

} // namespace vmi
