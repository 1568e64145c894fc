#include "cage/refine/request.hpp"

#include "cage/error.hpp"

namespace cage::refine {

RefinementRequest build_refinement_request(const synth::RenderOutput& prog, const StyleSpec& style,
                                           const RefineConfig& cfg) {
  if (prog.image.empty()) throw ValidationError("programmatic rendering is empty");
  RefinementRequest req;
  req.width = prog.image.width();
  req.height = prog.image.height();
  req.edge_map = imaging::canny(prog.image, cfg.canny);
  req.preservation_mask = imaging::build_text_mask(prog.regions, req.width, req.height, cfg.mask_padding);
  req.style = style;
  req.init_image = prog.image;
  if (prog.regions.empty()) req.warnings.push_back("no text regions reported; preservation mask is empty");
  return req;
}

}  // namespace cage::refine
