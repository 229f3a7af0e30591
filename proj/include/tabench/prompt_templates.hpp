#pragma once

#include <cstddef>

namespace tabench::detail {

struct EmbeddedTemplate {
    const char* id;
    const char* version;
    const char* text;
};

extern const EmbeddedTemplate kEmbeddedTemplates[];
extern const size_t kEmbeddedTemplateCount;

} // namespace tabench::detail
