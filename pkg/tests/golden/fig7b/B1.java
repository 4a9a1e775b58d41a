public interface B1 extends A1 {
    @Override
    default String func() {
        return null;
    }
}
