#pragma once

#include <cstddef>

namespace toolgt::detail {

struct EmbeddedFile {
    const char* name;
    const char* text;
};

// Defined in the generated embedded_data.cpp.
extern const EmbeddedFile kTemplateFiles[];
extern const std::size_t kTemplateFileCount;
extern const EmbeddedFile kPromptFiles[];
extern const std::size_t kPromptFileCount;

}  // namespace toolgt::detail
