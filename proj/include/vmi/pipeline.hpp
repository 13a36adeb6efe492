#pragma once

#include <string>

#include "vmi/brainvision.hpp"
#include "vmi/types.hpp"

namespace vmi {

struct loaded_recording {
    continuous_recording rec;
    std::string vhdr_path;
    std::string vmrk_path;
    std::string eeg_path;
};

// accepts a .vhdr path or a directory holding exactly one; companion files
// come from the header's DataFile/MarkerFile entries, resolved next to it.
// channel labels matching the standard montage get its positions; any other
// label set yields a positionless montage (convert still works, maps do not)
loaded_recording load_recording(const std::string& path,
                                const class_map& codes = default_class_map());

// cue-locked classification epochs: extract the analysis segment, then the
// optional notch, then the alpha band-pass (all zero-phase)
epoch_set classification_epochs(const continuous_recording& rec,
                                const analysis_config& cfg);

// wide unfiltered epochs spanning the pre-cue baseline through the task end;
// ERSP and topography slice these themselves
epoch_set analysis_epochs(const continuous_recording& rec, const analysis_config& cfg);

} // namespace vmi
