static int structure = 1; /* struct */
int main(void) { return structure; }
