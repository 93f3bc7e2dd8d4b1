#include "depthopt/types.h"

namespace depthopt {

static void fill_normalized_coords(PosedView& v, int h, int w) {
  v.qx.resize(h, w);
  v.qy.resize(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      v.qx(r, c) = (c - v.K.cx) / v.K.fx;
      v.qy(r, c) = (r - v.K.cy) / v.K.fy;
    }
  }
}

PosedView make_view(Image image, const Pose& pose, const Intrinsics& K) {
  require(K.fx != 0.0 && K.fy != 0.0, "make_view: zero focal length");
  PosedView v;
  v.image = std::move(image);
  v.pose = pose;
  v.K = K;
  fill_normalized_coords(v, v.image.rows(), v.image.cols());
  return v;
}

PosedView make_view(int h, int w, const Pose& pose, const Intrinsics& K) {
  require(K.fx != 0.0 && K.fy != 0.0, "make_view: zero focal length");
  PosedView v;
  v.pose = pose;
  v.K = K;
  fill_normalized_coords(v, h, w);
  return v;
}

}  // namespace depthopt
